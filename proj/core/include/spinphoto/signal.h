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

#ifndef SPINPHOTO_SIGNAL_H_
#define SPINPHOTO_SIGNAL_H_

#include <string>
#include <vector>

#include "spinphoto/engine.h"
#include "spinphoto/operators.h"

namespace spinphoto {

/// Detected transverse magnetization Tr(rho(t) F+) sampled every dwell.
struct Fid {
  double dwell_s = 0.0;
  std::vector<Complex> samples;
  double lb_hz = 0.0;
  /// Set when t_acq was not a whole number of dwells and got rounded down.
  bool truncated = false;

  double duration() const { return dwell_s * samples.size(); }
};

/// Free evolution under H0 after the pulses, one sample per dwell starting at
/// t = 0. The state is moved to the H0 eigenbasis once; each dwell then
/// multiplies every coherence by its precomputed phase factor.
Fid acquire(const DensityState& state, const StaticEigensystem& h0,
            double t_acq_s, double dwell_s);
Fid acquire(const DensityState& state, const SpinSystem& sys, double t_acq_s,
            double dwell_s);

/// samples[m] *= exp(-pi lb m dwell): a Lorentzian of FWHM lb.
Fid line_broaden(Fid fid, double lb_hz);

/// Phase convention of every spectrum: the FID is multiplied by +i before the
/// transform, so a hard 90 degree pulse about +x gives a positive absorptive
/// real part.
inline constexpr const char* kPhaseConvention = "x90-absorptive-positive";

struct Spectrum {
  std::vector<double> freq_hz;  // ascending, centered on the carrier
  std::vector<Complex> values;
  double df_hz = 0.0;
  double dwell_s = 0.0;
  double lb_hz = 0.0;
  int zero_fill = 0;

  int size() const { return static_cast<int>(values.size()); }
  /// Nearest bin to `f`; throws RangeError outside the axis.
  int BinOf(double f_hz) const;
  Complex At(double f_hz) const { return values[BinOf(f_hz)]; }
  /// df * sum of the real part over bins with |f - center| <= half_width.
  double WindowIntegral(double center_hz, double half_width_hz) const;
  double MaxAbs() const;
};

/// Zero-filled DFT scaled by dwell, on the axis (j - N/2) * df.
/// zero_fill must be a power of two no smaller than the sample count.
Spectrum spectrum(const Fid& fid, int zero_fill);

/// Arithmetic on spectra sharing an axis.
Spectrum Scaled(Spectrum s, Complex factor);
void Accumulate(Spectrum& into, const Spectrum& s, Complex weight);

std::string FidToCsv(const Fid& fid);
std::string FidSidecarJson(const Fid& fid);
std::string SpectrumToCsv(const Spectrum& s);
std::string SpectrumSidecarJson(const Spectrum& s);

}  // namespace spinphoto

#endif  // SPINPHOTO_SIGNAL_H_
