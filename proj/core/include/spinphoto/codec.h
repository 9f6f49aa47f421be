// Copyright 2026 The spinphoto Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPINPHOTO_CODEC_H_
#define SPINPHOTO_CODEC_H_

#include <optional>
#include <string>

#include <Eigen/Core>

#include "spinphoto/experiments.h"
#include "spinphoto/waveform.h"

namespace spinphoto {

/// Signed real amplitude of every slot, read from the stack row that
/// retrieves it: table(r, c) integrates row r over +-spacing/4 around the
/// frequency of slot (r, c).
Eigen::MatrixXd sample_slots(const SpectrumStack& stack, double f_start_hz,
                             double spacing_hz, int rows, int cols);

struct ThresholdMode {
  enum class Kind { kOtsu, kFixed };
  Kind kind = Kind::kOtsu;
  double value = 0.0;  // oriented threshold for kFixed

  static ThresholdMode Otsu() { return {}; }
  static ThresholdMode Fixed(double v) { return {Kind::kFixed, v}; }
};

struct DecodeReport {
  BitImage recovered;
  Eigen::MatrixXd slot_amplitudes;
  /// +1 or -1: amplitudes are multiplied by this before thresholding.
  int orientation = 1;
  double threshold = 0.0;
  /// min |oriented amplitude - threshold| / |threshold|.
  double margin = 0.0;
  std::string threshold_mode;
  std::optional<int> bit_errors;
};

/// Classifies each slot as one when its oriented amplitude reaches the
/// threshold. The orientation is the sign of the largest-magnitude entry.
/// Throws NoSeparationError when the table carries no contrast.
DecodeReport decode(const Eigen::MatrixXd& table, ThresholdMode mode);

/// Otsu split of a sample: the midpoint between consecutive sorted values
/// that maximizes the between-class variance.
double OtsuThreshold(const Eigen::VectorXd& values);

struct Fidelity {
  int bit_errors = 0;
  double accuracy = 0.0;
};

Fidelity fidelity(const BitImage& recovered, const BitImage& reference);

std::string DecodeReportToJson(const DecodeReport& report);

}  // namespace spinphoto

#endif  // SPINPHOTO_CODEC_H_
