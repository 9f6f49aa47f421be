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

#include "spinphoto/signal.h"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "spinphoto/error.h"

namespace spinphoto {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Phase factors are recomputed from scratch this often to stop the
// multiplicative recurrence from drifting.
constexpr int kResyncInterval = 512;

// FFTW planning is not thread safe.
std::mutex& FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

std::string Format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Fid acquire(const DensityState& state, const StaticEigensystem& h0,
            double t_acq_s, double dwell_s) {
  if (!(dwell_s > 0.0) || !(t_acq_s > 0.0)) {
    throw ValidationError("acquisition time and dwell must be positive");
  }
  if (state.n != h0.n() || state.matrix.rows() != h0.dim()) {
    throw ValidationError("state dimension does not match the spin system");
  }
  const double ratio = t_acq_s / dwell_s;
  int count = static_cast<int>(std::floor(ratio + 1e-9));
  if (count < 1) throw ValidationError("acquisition shorter than one dwell");
  Fid fid;
  fid.dwell_s = dwell_s;
  fid.truncated = std::abs(ratio - std::round(ratio)) > 1e-9;

  const SectorBasis& basis = h0.basis();
  const int n = basis.n();
  const CMatrix rho = basis.ToSectorOrder(state.matrix);

  // Coherences between sector c (k) and sector c-1 (l) carry the F+ signal:
  // sum_kl rho_e[k,l] F_e[l,k] exp(-i 2 pi (lambda_k - lambda_l) t).
  std::vector<double> amp_re, amp_im, freq;
  for (int c = 1; c <= n; ++c) {
    const int off_k = basis.offset(c), bk = basis.size(c);
    const int off_l = basis.offset(c - 1), bl = basis.size(c - 1);
    Eigen::MatrixXd raise = Eigen::MatrixXd::Zero(bl, bk);
    for (int a = 0; a < bk; ++a) {
      const int s = basis.order()[off_k + a];
      for (int k = 0; k < n; ++k) {
        const int mask = SpinMask(n, k);
        if (s & mask) raise(basis.position()[s ^ mask] - off_l, a) = 1.0;
      }
    }
    const Eigen::MatrixXd raise_e =
        h0.vectors(c - 1).transpose() * raise * h0.vectors(c);
    const CMatrix rho_e = h0.vectors(c).transpose().cast<Complex>() *
                          rho.block(off_k, off_l, bk, bl) *
                          h0.vectors(c - 1).cast<Complex>();
    for (int l = 0; l < bl; ++l) {
      for (int k = 0; k < bk; ++k) {
        const Complex a = rho_e(k, l) * raise_e(l, k);
        if (a == Complex(0.0, 0.0)) continue;
        amp_re.push_back(a.real());
        amp_im.push_back(a.imag());
        freq.push_back(h0.eigenvalues()(off_k + k) -
                       h0.eigenvalues()(off_l + l));
      }
    }
  }

  const std::size_t terms = freq.size();
  std::vector<double> cur_re(terms), cur_im(terms), rot_re(terms),
      rot_im(terms);
  for (std::size_t q = 0; q < terms; ++q) {
    const double step = -kTwoPi * freq[q] * dwell_s;
    rot_re[q] = std::cos(step);
    rot_im[q] = std::sin(step);
  }
  fid.samples.resize(count);
  for (int m = 0; m < count; ++m) {
    if (m % kResyncInterval == 0) {
      for (std::size_t q = 0; q < terms; ++q) {
        const double ph = -kTwoPi * freq[q] * dwell_s * m;
        cur_re[q] = amp_re[q] * std::cos(ph) - amp_im[q] * std::sin(ph);
        cur_im[q] = amp_re[q] * std::sin(ph) + amp_im[q] * std::cos(ph);
      }
    }
    double sum_re = 0.0, sum_im = 0.0;
    for (std::size_t q = 0; q < terms; ++q) {
      sum_re += cur_re[q];
      sum_im += cur_im[q];
      const double r = cur_re[q] * rot_re[q] - cur_im[q] * rot_im[q];
      const double i = cur_re[q] * rot_im[q] + cur_im[q] * rot_re[q];
      cur_re[q] = r;
      cur_im[q] = i;
    }
    fid.samples[m] = Complex(sum_re, sum_im);
  }
  return fid;
}

Fid acquire(const DensityState& state, const SpinSystem& sys, double t_acq_s,
            double dwell_s) {
  return acquire(state, StaticEigensystem(sys), t_acq_s, dwell_s);
}

Fid line_broaden(Fid fid, double lb_hz) {
  if (!(lb_hz >= 0.0) || !std::isfinite(lb_hz)) {
    throw ValidationError("line broadening must be non-negative");
  }
  if (lb_hz == 0.0) return fid;
  for (std::size_t m = 0; m < fid.samples.size(); ++m) {
    fid.samples[m] *= std::exp(-std::numbers::pi * lb_hz * m * fid.dwell_s);
  }
  fid.lb_hz += lb_hz;
  return fid;
}

int Spectrum::BinOf(double f_hz) const {
  if (values.empty()) throw RangeError("empty spectrum");
  const double lo = freq_hz.front() - 0.5 * df_hz;
  const double hi = freq_hz.back() + 0.5 * df_hz;
  if (!(f_hz >= lo && f_hz < hi)) {
    throw RangeError("frequency " + std::to_string(f_hz) +
                     " Hz outside the spectral axis");
  }
  const int bin =
      static_cast<int>(std::lround((f_hz - freq_hz.front()) / df_hz));
  return std::clamp(bin, 0, size() - 1);
}

double Spectrum::WindowIntegral(double center_hz, double half_width_hz) const {
  BinOf(center_hz - half_width_hz);
  BinOf(center_hz + half_width_hz);
  const int lo = static_cast<int>(
      std::ceil((center_hz - half_width_hz - freq_hz.front()) / df_hz - 1e-9));
  const int hi = static_cast<int>(
      std::floor((center_hz + half_width_hz - freq_hz.front()) / df_hz + 1e-9));
  double sum = 0.0;
  for (int j = std::max(lo, 0); j <= std::min(hi, size() - 1); ++j) {
    sum += values[j].real();
  }
  return sum * df_hz;
}

double Spectrum::MaxAbs() const {
  double m = 0.0;
  for (const Complex& v : values) m = std::max(m, std::abs(v));
  return m;
}

Spectrum spectrum(const Fid& fid, int zero_fill) {
  if (zero_fill <= 0 || !std::has_single_bit(static_cast<unsigned>(zero_fill))) {
    throw ValidationError("zero fill must be a power of two");
  }
  if (zero_fill < static_cast<int>(fid.samples.size())) {
    throw ValidationError("zero fill smaller than the sample count");
  }
  if (!(fid.dwell_s > 0.0)) throw ValidationError("dwell must be positive");
  const int n = zero_fill;
  std::vector<Complex> in(n, Complex(0.0, 0.0)), out(n);
  for (std::size_t m = 0; m < fid.samples.size(); ++m) {
    in[m] = Complex(0.0, 1.0) * fid.samples[m];
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                            reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(plan);
  }
  Spectrum s;
  s.zero_fill = n;
  s.dwell_s = fid.dwell_s;
  s.lb_hz = fid.lb_hz;
  s.df_hz = 1.0 / (n * fid.dwell_s);
  s.freq_hz.resize(n);
  s.values.resize(n);
  for (int j = 0; j < n; ++j) {
    s.freq_hz[j] = (j - n / 2) * s.df_hz;
    s.values[j] = out[(j + n / 2) % n] * fid.dwell_s;
  }
  return s;
}

Spectrum Scaled(Spectrum s, Complex factor) {
  for (Complex& v : s.values) v *= factor;
  return s;
}

void Accumulate(Spectrum& into, const Spectrum& s, Complex weight) {
  if (into.values.empty()) {
    into = Scaled(s, weight);
    return;
  }
  if (into.size() != s.size() || into.df_hz != s.df_hz) {
    throw ValidationError("spectra do not share a frequency axis");
  }
  for (int j = 0; j < s.size(); ++j) into.values[j] += weight * s.values[j];
}

std::string FidToCsv(const Fid& fid) {
  std::ostringstream os;
  os << "t_s,re,im\n";
  for (std::size_t m = 0; m < fid.samples.size(); ++m) {
    os << Format17(m * fid.dwell_s) << ',' << Format17(fid.samples[m].real())
       << ',' << Format17(fid.samples[m].imag()) << '\n';
  }
  return os.str();
}

std::string FidSidecarJson(const Fid& fid) {
  nlohmann::ordered_json j;
  j["format"] = "spinphoto-fid/1";
  j["dwell_s"] = fid.dwell_s;
  j["n_samples"] = fid.samples.size();
  j["lb_hz"] = fid.lb_hz;
  j["zero_fill"] = nullptr;
  j["truncated"] = fid.truncated;
  j["phase_convention"] = kPhaseConvention;
  return j.dump(2) + "\n";
}

std::string SpectrumToCsv(const Spectrum& s) {
  std::ostringstream os;
  os << "freq_hz,re,im\n";
  for (int j = 0; j < s.size(); ++j) {
    os << Format17(s.freq_hz[j]) << ',' << Format17(s.values[j].real()) << ','
       << Format17(s.values[j].imag()) << '\n';
  }
  return os.str();
}

std::string SpectrumSidecarJson(const Spectrum& s) {
  nlohmann::ordered_json j;
  j["format"] = "spinphoto-spectrum/1";
  j["dwell_s"] = s.dwell_s;
  j["zero_fill"] = s.zero_fill;
  j["df_hz"] = s.df_hz;
  j["lb_hz"] = s.lb_hz;
  j["phase_convention"] = kPhaseConvention;
  return j.dump(2) + "\n";
}

}  // namespace spinphoto
