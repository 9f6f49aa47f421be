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

#ifndef SPINPHOTO_WAVEFORM_H_
#define SPINPHOTO_WAVEFORM_H_

#include <cstdint>
#include <string>
#include <vector>

namespace spinphoto {

inline constexpr int kMaxImageBits = 4096;

/// A rows x cols grid of bits. Storage is row-major; the pulse mapping is
/// column-major (see bits_to_harmonics).
struct BitImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bits;

  static BitImage Zeros(int rows, int cols);
  std::uint8_t at(int r, int c) const { return bits[r * cols + c]; }
  std::uint8_t& at(int r, int c) { return bits[r * cols + c]; }
  int size() const { return rows * cols; }
  int Ones() const;
  void Validate() const;

  bool operator==(const BitImage&) const = default;
};

/// Plain PBM ("P1"). Parsing accepts comments and any whitespace layout;
/// writing emits one image row per line.
BitImage ParsePbm(const std::string& text);
std::string FormatPbm(const BitImage& img);

/// One circularly polarized component of a multi-frequency pulse.
struct Harmonic {
  double frequency_hz = 0.0;  // relative to the pulse reference frequency
  double amplitude_hz = 0.0;  // precession frequency gamma*B1/2pi
  double phase_rad = 0.0;

  bool operator==(const Harmonic&) const = default;
};

struct HarmonicSet {
  std::vector<Harmonic> harmonics;

  /// Non-empty, strictly increasing frequencies, non-negative finite
  /// amplitudes.
  void Validate() const;
  double MaxAbsFrequency() const;
  bool operator==(const HarmonicSet&) const = default;
};

/// Slot frequency of linear bit index k: f_start + k * spacing.
inline double SlotFrequency(double f_start_hz, double spacing_hz, int k) {
  return f_start_hz + k * spacing_hz;
}

/// Column-major linear index from the upper-left corner: k = c * rows + r.
inline int SlotIndex(int rows, int r, int c) { return c * rows + r; }

/// Start frequency that centers `slots` slots on the carrier.
inline double CenteredStart(int slots, double spacing_hz) {
  return -0.5 * spacing_hz * (slots - 1);
}

/// Every bit owns a harmonic at its slot frequency; ones get amp_one, zeros
/// keep a zero-amplitude entry so the slot grid stays explicit.
HarmonicSet bits_to_harmonics(const BitImage& img, double f_start_hz,
                              double spacing_hz, double amp_one_hz);

/// Reads the nonzero-amplitude slots of a set produced by bits_to_harmonics.
BitImage harmonics_to_bits(const HarmonicSet& hs, int rows, int cols);

/// The comb that hits slot (row, c) for every column c: n_cols teeth at
/// f_start + row * spacing + m * spacing * n_rows.
HarmonicSet row_harmonics(int row, double f_start_hz, double spacing_hz,
                          int n_cols, int n_rows, double amp_hz);

/// Adds `shift_rad` to every harmonic phase.
HarmonicSet ShiftPhases(HarmonicSet hs, double shift_rad);

/// Replaces every phase with a uniform draw in [0, 2pi). Lowers the crest
/// factor of large combs; never used unless asked for.
HarmonicSet RandomizePhases(HarmonicSet hs, std::uint64_t seed);

/// Rotating-frame rf field held constant over one step.
struct RfStep {
  double bx_hz = 0.0;
  double by_hz = 0.0;

  bool operator==(const RfStep&) const = default;
};

/// Piecewise-constant rf waveform sampled at a constant rate.
///
/// The empty waveform (zero duration, no steps) is the identity pulse.
struct Waveform {
  double duration_s = 0.0;
  double reference_offset_hz = 0.0;
  std::vector<RfStep> steps;

  int n_steps() const { return static_cast<int>(steps.size()); }
  double dt() const { return steps.empty() ? 0.0 : duration_s / n_steps(); }
  bool empty() const { return steps.empty(); }
  void Validate() const;

  static Waveform Empty() { return {}; }
  /// n_steps copies of the same field.
  static Waveform Constant(double bx_hz, double by_hz, double duration_s,
                           int n_steps);

  bool operator==(const Waveform&) const = default;
};

/// Samples sum_k a_k (cos, sin)(2 pi (f_ref + f_k) t + phi_k) at the step
/// midpoints t_s = (s + 1/2) dt.
///
/// Throws AliasingError when n_steps < 2 * duration * max|f_ref + f_k|.
Waveform synthesize(const HarmonicSet& hs, double duration_s, int n_steps,
                    double reference_offset_hz = 0.0);

/// Waveform CSV ("step,bx_hz,by_hz", 17 significant digits) and its JSON
/// sidecar. Parsing the pair reproduces the waveform exactly.
std::string WaveformToCsv(const Waveform& wf);
std::string WaveformSidecarJson(const Waveform& wf);
Waveform WaveformFromFiles(const std::string& csv, const std::string& sidecar);

}  // namespace spinphoto

#endif  // SPINPHOTO_WAVEFORM_H_
