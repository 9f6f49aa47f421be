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

#include "spinphoto/waveform.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "spinphoto/error.h"
#include "spinphoto/spin_system.h"

namespace spinphoto {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string Format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

BitImage BitImage::Zeros(int rows, int cols) {
  BitImage img{rows, cols, {}};
  if (rows < 1 || cols < 1 || rows * cols > kMaxImageBits) {
    throw ValidationError("image dimensions out of range");
  }
  img.bits.assign(rows * cols, 0);
  return img;
}

int BitImage::Ones() const {
  return static_cast<int>(std::count(bits.begin(), bits.end(), 1));
}

void BitImage::Validate() const {
  if (rows < 1 || cols < 1) throw ValidationError("image must not be empty");
  if (rows * cols > kMaxImageBits) {
    throw ValidationError("image exceeds 4096 bits");
  }
  if (static_cast<int>(bits.size()) != rows * cols) {
    throw ValidationError("image bit count does not match its dimensions");
  }
  for (std::uint8_t b : bits) {
    if (b > 1) throw ValidationError("image cells must be 0 or 1");
  }
}

BitImage ParsePbm(const std::string& text) {
  // Strip comments, then read whitespace-separated tokens. In plain PBM the
  // raster digits need not be separated, so every 0/1 character is a cell.
  std::string clean;
  clean.reserve(text.size());
  bool comment = false;
  for (char ch : text) {
    if (ch == '#') comment = true;
    if (ch == '\n' || ch == '\r') comment = false;
    if (!comment) clean.push_back(ch);
  }
  std::istringstream is(clean);
  std::string magic;
  int cols = 0, rows = 0;
  if (!(is >> magic) || magic != "P1") {
    throw ValidationError("not a plain PBM file (missing P1 magic)");
  }
  if (!(is >> cols >> rows) || cols < 1 || rows < 1) {
    throw ValidationError("PBM header has invalid dimensions");
  }
  if (static_cast<long>(rows) * cols > kMaxImageBits) {
    throw ValidationError("image exceeds 4096 bits");
  }
  BitImage img = BitImage::Zeros(rows, cols);
  int filled = 0;
  char ch;
  while (is.get(ch)) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch != '0' && ch != '1') {
      throw ValidationError(std::string("unexpected PBM character '") + ch +
                            "'");
    }
    if (filled == rows * cols) {
      throw ValidationError("PBM raster has more cells than its header");
    }
    img.bits[filled++] = static_cast<std::uint8_t>(ch - '0');
  }
  if (filled != rows * cols) {
    throw ValidationError("PBM raster has fewer cells than its header");
  }
  return img;
}

std::string FormatPbm(const BitImage& img) {
  img.Validate();
  std::ostringstream os;
  os << "P1\n" << img.cols << ' ' << img.rows << '\n';
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      if (c) os << ' ';
      os << static_cast<int>(img.at(r, c));
    }
    os << '\n';
  }
  return os.str();
}

void HarmonicSet::Validate() const {
  if (harmonics.empty()) throw ValidationError("harmonic set is empty");
  for (std::size_t k = 0; k < harmonics.size(); ++k) {
    const Harmonic& h = harmonics[k];
    if (!std::isfinite(h.frequency_hz) || !std::isfinite(h.amplitude_hz) ||
        !std::isfinite(h.phase_rad)) {
      throw ValidationError("harmonic values must be finite");
    }
    if (h.amplitude_hz < 0.0) {
      throw ValidationError("harmonic amplitudes must be non-negative");
    }
    if (k > 0 && !(h.frequency_hz > harmonics[k - 1].frequency_hz)) {
      throw ValidationError("harmonic frequencies must be strictly increasing");
    }
  }
}

double HarmonicSet::MaxAbsFrequency() const {
  double m = 0.0;
  for (const Harmonic& h : harmonics) m = std::max(m, std::abs(h.frequency_hz));
  return m;
}

HarmonicSet bits_to_harmonics(const BitImage& img, double f_start_hz,
                              double spacing_hz, double amp_one_hz) {
  img.Validate();
  if (!(spacing_hz > 0.0)) throw ValidationError("slot spacing must be positive");
  if (!(amp_one_hz > 0.0)) throw ValidationError("amplitude must be positive");
  HarmonicSet hs;
  hs.harmonics.resize(img.size());
  for (int c = 0; c < img.cols; ++c) {
    for (int r = 0; r < img.rows; ++r) {
      const int k = SlotIndex(img.rows, r, c);
      hs.harmonics[k] = {SlotFrequency(f_start_hz, spacing_hz, k),
                         img.at(r, c) ? amp_one_hz : 0.0, 0.0};
    }
  }
  return hs;
}

BitImage harmonics_to_bits(const HarmonicSet& hs, int rows, int cols) {
  BitImage img = BitImage::Zeros(rows, cols);
  if (static_cast<int>(hs.harmonics.size()) != rows * cols) {
    throw ValidationError("harmonic count does not match the image size");
  }
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      img.at(r, c) = hs.harmonics[SlotIndex(rows, r, c)].amplitude_hz > 0.0;
    }
  }
  return img;
}

HarmonicSet row_harmonics(int row, double f_start_hz, double spacing_hz,
                          int n_cols, int n_rows, double amp_hz) {
  if (n_rows < 1 || n_cols < 1) throw ValidationError("empty comb geometry");
  if (row < 0 || row >= n_rows) {
    throw RangeError("row " + std::to_string(row) + " outside [0, " +
                     std::to_string(n_rows) + ")");
  }
  if (!(spacing_hz > 0.0)) throw ValidationError("slot spacing must be positive");
  if (!(amp_hz >= 0.0)) throw ValidationError("amplitude must be non-negative");
  HarmonicSet hs;
  const double interval = spacing_hz * n_rows;
  for (int m = 0; m < n_cols; ++m) {
    hs.harmonics.push_back(
        {f_start_hz + row * spacing_hz + m * interval, amp_hz, 0.0});
  }
  return hs;
}

HarmonicSet ShiftPhases(HarmonicSet hs, double shift_rad) {
  for (Harmonic& h : hs.harmonics) h.phase_rad += shift_rad;
  return hs;
}

HarmonicSet RandomizePhases(HarmonicSet hs, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  for (Harmonic& h : hs.harmonics) h.phase_rad = kTwoPi * unit_uniform(engine());
  return hs;
}

void Waveform::Validate() const {
  if (steps.empty()) {
    if (duration_s != 0.0) {
      throw ValidationError("a waveform without steps must have zero duration");
    }
    return;
  }
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ValidationError("waveform duration must be positive");
  }
  for (const RfStep& s : steps) {
    if (!std::isfinite(s.bx_hz) || !std::isfinite(s.by_hz)) {
      throw ValidationError("waveform steps must be finite");
    }
  }
}

Waveform Waveform::Constant(double bx_hz, double by_hz, double duration_s,
                            int n_steps) {
  if (n_steps == 0 && duration_s == 0.0) return Empty();
  if (n_steps < 1 || !(duration_s > 0.0)) {
    throw ValidationError("constant waveform needs positive duration and steps");
  }
  Waveform wf;
  wf.duration_s = duration_s;
  wf.steps.assign(n_steps, RfStep{bx_hz, by_hz});
  return wf;
}

Waveform synthesize(const HarmonicSet& hs, double duration_s, int n_steps,
                    double reference_offset_hz) {
  hs.Validate();
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ValidationError("pulse duration must be positive");
  }
  if (n_steps < 1) throw ValidationError("pulse needs at least one step");
  double fmax = 0.0;
  for (const Harmonic& h : hs.harmonics) {
    fmax = std::max(fmax, std::abs(reference_offset_hz + h.frequency_hz));
  }
  const double required = 2.0 * duration_s * fmax;
  if (n_steps < required) {
    throw AliasingError("waveform undersampled: " + std::to_string(n_steps) +
                        " steps over " + Format17(duration_s) +
                        " s cannot carry " + Format17(fmax) +
                        " Hz (need at least " + Format17(std::ceil(required)) +
                        ")");
  }
  Waveform wf;
  wf.duration_s = duration_s;
  wf.reference_offset_hz = reference_offset_hz;
  wf.steps.resize(n_steps);
  const double dt = duration_s / n_steps;
  for (int s = 0; s < n_steps; ++s) {
    const double t = (s + 0.5) * dt;
    double bx = 0.0, by = 0.0;
    for (const Harmonic& h : hs.harmonics) {
      if (h.amplitude_hz == 0.0) continue;
      const double arg =
          kTwoPi * (reference_offset_hz + h.frequency_hz) * t + h.phase_rad;
      bx += h.amplitude_hz * std::cos(arg);
      by += h.amplitude_hz * std::sin(arg);
    }
    wf.steps[s] = {bx, by};
  }
  return wf;
}

std::string WaveformToCsv(const Waveform& wf) {
  std::ostringstream os;
  os << "step,bx_hz,by_hz\n";
  for (int s = 0; s < wf.n_steps(); ++s) {
    os << s << ',' << Format17(wf.steps[s].bx_hz) << ','
       << Format17(wf.steps[s].by_hz) << '\n';
  }
  return os.str();
}

std::string WaveformSidecarJson(const Waveform& wf) {
  nlohmann::ordered_json j;
  j["format"] = "spinphoto-waveform/1";
  j["duration_s"] = wf.duration_s;
  j["n_steps"] = wf.n_steps();
  j["reference_offset_hz"] = wf.reference_offset_hz;
  return j.dump(2) + "\n";
}

Waveform WaveformFromFiles(const std::string& csv, const std::string& sidecar) {
  Waveform wf;
  int n_steps = 0;
  try {
    const nlohmann::json j = nlohmann::json::parse(sidecar);
    wf.duration_s = j.at("duration_s").get<double>();
    n_steps = j.at("n_steps").get<int>();
    wf.reference_offset_hz = j.value("reference_offset_hz", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("waveform sidecar: ") + e.what());
  }
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line) || line != "step,bx_hz,by_hz") {
    throw ValidationError("waveform CSV header must be 'step,bx_hz,by_hz'");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int step = 0;
    double bx = 0.0, by = 0.0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf", &step, &bx, &by) != 3 ||
        step != wf.n_steps()) {
      throw ValidationError("malformed waveform CSV row: " + line);
    }
    wf.steps.push_back({bx, by});
  }
  if (wf.n_steps() != n_steps) {
    throw ValidationError("waveform CSV row count disagrees with the sidecar");
  }
  wf.Validate();
  return wf;
}

}  // namespace spinphoto
