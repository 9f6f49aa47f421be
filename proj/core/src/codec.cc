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

#include "spinphoto/codec.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "json.hpp"
#include "spinphoto/error.h"

namespace spinphoto {

Eigen::MatrixXd sample_slots(const SpectrumStack& stack, double f_start_hz,
                             double spacing_hz, int rows, int cols) {
  if (stack.size() != rows) {
    throw ValidationError("stack has " + std::to_string(stack.size()) +
                          " rows, expected " + std::to_string(rows));
  }
  if (cols < 1) throw ValidationError("cols must be positive");
  if (!(spacing_hz > 0.0)) throw ValidationError("spacing_hz must be positive");
  Eigen::MatrixXd table(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double f = SlotFrequency(f_start_hz, spacing_hz, SlotIndex(rows, r, c));
      table(r, c) = stack.rows[r].WindowIntegral(f, 0.25 * spacing_hz);
    }
  }
  return table;
}

double OtsuThreshold(const Eigen::VectorXd& values) {
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const int n = static_cast<int>(v.size());
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];

  double best = -1.0;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  for (int k = 1; k < n; ++k) {
    if (v[k] == v[k - 1]) continue;
    const double w0 = k, w1 = n - k;
    const double m0 = prefix[k] / w0;
    const double m1 = (prefix[n] - prefix[k]) / w1;
    const double between = w0 * w1 * (m1 - m0) * (m1 - m0);
    if (between > best) {
      best = between;
      threshold = 0.5 * (v[k - 1] + v[k]);
    }
  }
  if (std::isnan(threshold)) throw NoSeparationError("all slot amplitudes are equal");
  return threshold;
}

DecodeReport decode(const Eigen::MatrixXd& table, ThresholdMode mode) {
  if (table.size() == 0) throw ValidationError("empty amplitude table");
  if (!table.allFinite()) throw ValidationError("amplitude table is not finite");

  DecodeReport report;
  report.slot_amplitudes = table;
  Eigen::Index arg = 0;
  table.cwiseAbs().reshaped().maxCoeff(&arg);
  const double dominant = table.reshaped()(arg);
  if (dominant == 0.0 || table.maxCoeff() == table.minCoeff()) {
    throw NoSeparationError("amplitude table has no contrast");
  }
  report.orientation = dominant > 0.0 ? 1 : -1;
  const Eigen::MatrixXd oriented = report.orientation * table;

  if (mode.kind == ThresholdMode::Kind::kOtsu) {
    report.threshold = OtsuThreshold(oriented.reshaped());
    report.threshold_mode = "otsu";
  } else {
    if (!std::isfinite(mode.value)) throw ValidationError("threshold must be finite");
    report.threshold = mode.value;
    report.threshold_mode = "fixed";
  }
  if (report.threshold == 0.0) {
    throw NoSeparationError("threshold is zero; margin undefined");
  }

  report.recovered = BitImage::Zeros(static_cast<int>(table.rows()),
                                     static_cast<int>(table.cols()));
  double margin = std::numeric_limits<double>::infinity();
  for (int r = 0; r < table.rows(); ++r) {
    for (int c = 0; c < table.cols(); ++c) {
      const double v = oriented(r, c);
      report.recovered.at(r, c) = v >= report.threshold ? 1 : 0;
      margin = std::min(margin, std::abs(v - report.threshold));
    }
  }
  report.margin = margin / std::abs(report.threshold);
  return report;
}

Fidelity fidelity(const BitImage& recovered, const BitImage& reference) {
  if (recovered.rows != reference.rows || recovered.cols != reference.cols) {
    throw ValidationError("image dimensions differ");
  }
  Fidelity f;
  for (int i = 0; i < recovered.size(); ++i) {
    if ((recovered.bits[i] != 0) != (reference.bits[i] != 0)) ++f.bit_errors;
  }
  f.accuracy = recovered.size() == 0
                   ? 1.0
                   : 1.0 - static_cast<double>(f.bit_errors) / recovered.size();
  return f;
}

std::string DecodeReportToJson(const DecodeReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "spinphoto-decode/1";
  j["rows"] = report.recovered.rows;
  j["cols"] = report.recovered.cols;
  j["threshold_mode"] = report.threshold_mode;
  j["orientation"] = report.orientation;
  j["threshold"] = report.threshold;
  j["margin"] = report.margin;
  auto amps = nlohmann::ordered_json::array();
  auto bits = nlohmann::ordered_json::array();
  for (int r = 0; r < report.slot_amplitudes.rows(); ++r) {
    auto arow = nlohmann::ordered_json::array();
    auto brow = nlohmann::ordered_json::array();
    for (int c = 0; c < report.slot_amplitudes.cols(); ++c) {
      arow.push_back(report.slot_amplitudes(r, c));
      brow.push_back(report.recovered.at(r, c));
    }
    amps.push_back(std::move(arow));
    bits.push_back(std::move(brow));
  }
  j["slot_amplitudes"] = std::move(amps);
  j["recovered"] = std::move(bits);
  if (report.bit_errors) j["bit_errors"] = *report.bit_errors;
  return j.dump(2) + "\n";
}

}  // namespace spinphoto
