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

#include "spinphoto/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "spinphoto/error.h"

namespace spinphoto {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool IsPowerOfTwo(int v) { return v > 0 && (v & (v - 1)) == 0; }

void CheckPulse(const StaticEigensystem& h0, const Waveform& wf,
                const char* name) {
  wf.Validate();
  if (!StepSizeAdequate(h0, wf)) {
    Warn(std::string(name) + ": dt = " + std::to_string(wf.dt() * 1e6) +
         " us exceeds the conservative step-size bound");
  }
}

}  // namespace

void Acquisition::Validate() const {
  if (!(t_acq_s > 0.0)) throw ValidationError("t_acq_s must be positive");
  if (!(dwell_s > 0.0) || dwell_s > t_acq_s) {
    throw ValidationError("dwell_s must be positive and no longer than t_acq_s");
  }
  if (!(lb_hz >= 0.0)) throw ValidationError("lb_hz must be non-negative");
  if (!(dead_time_s >= 0.0)) throw ValidationError("dead_time_s must be non-negative");
  if (!IsPowerOfTwo(zero_fill)) throw ValidationError("zero_fill must be a power of two");
  const auto samples = static_cast<long>(std::floor(t_acq_s / dwell_s + 1e-9));
  if (samples > zero_fill) {
    throw ValidationError("zero_fill smaller than the number of samples");
  }
}

void ExperimentPlan::Validate() const {
  sys.Validate();
  if (!pulse1 && !pulse2) throw ValidationError("plan has no pulse");
  if (pulse1) pulse1->Validate();
  if (pulse2) {
    pulse2->Validate();
    if (pulse2_phase_cycle.empty()) {
      throw ValidationError("phase cycle must be non-empty when pulse 2 is present");
    }
  }
  acquisition.Validate();
}

void SpectrumStack::Validate() const {
  if (rows.size() != row_freqs.size()) {
    throw ValidationError("stack rows and row frequencies differ in length");
  }
  for (const Spectrum& s : rows) {
    if (s.freq_hz != rows.front().freq_hz) {
      throw ValidationError("stack rows do not share a frequency axis");
    }
  }
}

Waveform RotatePhase(Waveform wf, double phase_rad) {
  const double c = std::cos(phase_rad), s = std::sin(phase_rad);
  for (RfStep& st : wf.steps) {
    st = {c * st.bx_hz - s * st.by_hz, s * st.bx_hz + c * st.by_hz};
  }
  return wf;
}

Waveform HardPulse(double flip_deg, double duration_s, int n_steps) {
  if (!(duration_s > 0.0) || n_steps < 1) {
    throw ValidationError("hard pulse needs a positive duration and steps");
  }
  const double amp = flip_deg / 360.0 / duration_s;
  return Waveform::Constant(amp, 0.0, duration_s, n_steps);
}

int AdequateSteps(const StaticEigensystem& h0, double duration_s,
                  double peak_rf_hz, int quantum) {
  if (!(duration_s > 0.0)) return 0;
  const double scale = std::max(h0.SpectralRadius(), 0.5 * h0.n() * peak_rf_hz);
  if (scale == 0.0) return quantum;
  const double steps = std::ceil(duration_s * 20.0 * scale / quantum - 1e-9);
  return std::max(1, static_cast<int>(steps)) * quantum;
}

// ---------------------------------------------------------------------------

namespace {

Spectrum AcquireSpectrum(const StaticEigensystem& h0, DensityState state,
                         const Acquisition& acq) {
  if (acq.dead_time_s > 0.0) {
    state = ApplyPropagator(state, h0.FreePropagator(acq.dead_time_s));
  }
  return spectrum(line_broaden(acquire(state, h0, acq.t_acq_s, acq.dwell_s),
                               acq.lb_hz),
                  acq.zero_fill);
}

DensityState AfterPulse1(const ExperimentPlan& plan, const StaticEigensystem& h0) {
  DensityState rho = thermal_state(plan.sys);
  if (plan.pulse1 && !plan.pulse1->empty()) {
    CheckPulse(h0, *plan.pulse1, "pulse1");
    rho = evolve(rho, h0, *plan.pulse1, plan.mode);
  }
  return rho;
}

}  // namespace

Spectrum run_single_pulse(const ExperimentPlan& plan) {
  plan.Validate();
  if (plan.pulse2) throw ValidationError("single-pulse plan carries a second pulse");
  const StaticEigensystem h0(plan.sys);
  return AcquireSpectrum(h0, AfterPulse1(plan, h0), plan.acquisition);
}

// Branch k rotates pulse 2 by d_k = cycle[k] - cycle[0] on top of cycle[0].
// Because H0 and the thermal state commute with Fz,
//   U2(d) rho1 U2(d)^+ = Rz(d) [U2 Rz(-d)[rho1] U2^+],
// and the outer rotation multiplies the detected signal by exp(i d), which
// the receiver phase exp(-i d) removes. Each branch therefore needs only
// rho1 rotated by -d_k and the one shared propagator U2.
TwoPulseRunner::TwoPulseRunner(const StaticEigensystem& h0,
                               const DensityState& after_pulse1,
                               std::vector<double> phase_cycle,
                               Acquisition acquisition)
    : h0_(h0), cycle_(std::move(phase_cycle)), acquisition_(acquisition) {
  if (cycle_.empty()) throw ValidationError("phase cycle must be non-empty");
  acquisition_.Validate();
  for (double phi : cycle_) {
    branches_.push_back(RotateAboutZ(after_pulse1, -(phi - cycle_.front())));
  }
}

Spectrum TwoPulseRunner::Acquire(const DensityState& state) const {
  return AcquireSpectrum(h0_, state, acquisition_);
}

Spectrum TwoPulseRunner::RunWithPropagator(const CMatrix& u2) const {
  const double norm = 1.0 / static_cast<double>(branches_.size());
  Spectrum total;
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    Spectrum s = Acquire(ApplyPropagator(branches_[k], u2));
    if (k == 0) {
      total = Scaled(std::move(s), sign * norm);
    } else {
      Accumulate(total, s, sign * norm);
    }
  }
  return total;
}

Spectrum TwoPulseRunner::Run(const Waveform& pulse2, PropagationMode mode) const {
  if (pulse2.empty()) return Reference();
  CheckPulse(h0_, pulse2, "pulse2");
  return RunWithPropagator(
      PulsePropagator(h0_, RotatePhase(pulse2, cycle_.front()), mode));
}

Spectrum TwoPulseRunner::Reference() const {
  return RunWithPropagator(CMatrix::Identity(h0_.dim(), h0_.dim()));
}

Spectrum run_two_pulse(const ExperimentPlan& plan) {
  plan.Validate();
  if (!plan.pulse1 || !plan.pulse2) {
    throw ValidationError("two-pulse plan needs both pulses");
  }
  const StaticEigensystem h0(plan.sys);
  const TwoPulseRunner runner(h0, AfterPulse1(plan, h0), plan.pulse2_phase_cycle,
                              plan.acquisition);
  return runner.Run(*plan.pulse2, plan.mode);
}

// ---------------------------------------------------------------------------

std::string_view ToString(Readout r) {
  return r == Readout::kCycled ? "cycled" : "difference";
}

Readout ParseReadout(std::string_view text) {
  if (text == "cycled") return Readout::kCycled;
  if (text == "difference") return Readout::kDifference;
  throw ValidationError("unknown readout '" + std::string(text) + "'");
}

double PhotographyConfig::StartFor(int slots) const {
  return f_start_hz ? *f_start_hz : CenteredStart(slots, spacing_hz);
}

void PhotographyConfig::Validate(const BitImage& img) const {
  img.Validate();
  if (!(spacing_hz > 0.0)) throw ValidationError("spacing_hz must be positive");
  if (!(amp1_hz > 0.0) || !(dur1_s > 0.0)) {
    throw ValidationError("pulse 1 needs positive amplitude and duration");
  }
  if (!(amp2_hz >= 0.0) || !(dur2_s >= 0.0)) {
    throw ValidationError("pulse 2 amplitude and duration must be non-negative");
  }
  if (steps1 < 0 || steps2 < 0) throw ValidationError("step counts must be >= 0");
  if (phase_cycle.empty()) throw ValidationError("phase cycle must be non-empty");
  for (const auto* mask : {&pulse1_mask, &pulse2_mask}) {
    if (*mask && ((*mask)->rows != img.rows || (*mask)->cols != img.cols)) {
      throw ValidationError("slot mask dimensions differ from the image");
    }
  }
  acquisition.Validate();
}

namespace {

HarmonicSet Pulse1Harmonics(const BitImage& img, const PhotographyConfig& cfg) {
  BitImage bits = img;
  if (cfg.pulse1_mask) {
    for (int i = 0; i < bits.size(); ++i) bits.bits[i] &= cfg.pulse1_mask->bits[i];
  }
  HarmonicSet hs =
      bits_to_harmonics(bits, cfg.StartFor(img.size()), cfg.spacing_hz, cfg.amp1_hz);
  if (cfg.phase_seed) hs = RandomizePhases(std::move(hs), *cfg.phase_seed);
  return hs;
}

int StepsFor(const StaticEigensystem& h0, int configured, double duration_s,
             double peak_rf_hz) {
  return configured > 0 ? configured : AdequateSteps(h0, duration_s, peak_rf_hz);
}

double PeakOf(const HarmonicSet& hs) {
  double sum = 0.0;
  for (const Harmonic& h : hs.harmonics) sum += h.amplitude_hz;
  return sum;
}

}  // namespace

Waveform PhotographyPulse1(const BitImage& img, const PhotographyConfig& cfg,
                           const StaticEigensystem& h0) {
  const HarmonicSet hs = Pulse1Harmonics(img, cfg);
  return synthesize(hs, cfg.dur1_s,
                    StepsFor(h0, cfg.steps1, cfg.dur1_s, PeakOf(hs)));
}

Waveform PhotographyPulse2(const BitImage& img, const PhotographyConfig& cfg,
                           const StaticEigensystem& h0, int row) {
  if (cfg.dur2_s == 0.0) return Waveform::Empty();
  const HarmonicSet hs1 = Pulse1Harmonics(img, cfg);
  HarmonicSet hs = row_harmonics(row, cfg.StartFor(img.size()), cfg.spacing_hz,
                                 img.cols, img.rows, cfg.amp2_hz);
  for (int c = 0; c < img.cols; ++c) {
    Harmonic& h = hs.harmonics[c];
    // Continue the phase the pulse-1 harmonic of this slot reached.
    const double phase1 = hs1.harmonics[SlotIndex(img.rows, row, c)].phase_rad;
    h.phase_rad = std::remainder(phase1 + kTwoPi * h.frequency_hz * cfg.dur1_s, kTwoPi);
    if (cfg.pulse2_mask && !cfg.pulse2_mask->at(row, c)) h.amplitude_hz = 0.0;
  }
  return synthesize(hs, cfg.dur2_s,
                    StepsFor(h0, cfg.steps2, cfg.dur2_s, PeakOf(hs)));
}

SpectrumStack run_photography(const BitImage& img, const SpinSystem& sys,
                              const PhotographyConfig& cfg,
                              const PhotographyOptions& opts) {
  cfg.Validate(img);
  sys.Validate();
  const StaticEigensystem h0(sys);
  const Waveform pulse1 = PhotographyPulse1(img, cfg, h0);
  CheckPulse(h0, pulse1, "pulse1");
  std::vector<Waveform> pulse2(img.rows);
  for (int r = 0; r < img.rows; ++r) {
    pulse2[r] = PhotographyPulse2(img, cfg, h0, r);
    if (!pulse2[r].empty()) CheckPulse(h0, pulse2[r], "pulse2");
  }

  const DensityState rho1 = evolve(thermal_state(sys), h0, pulse1, opts.mode);
  const TwoPulseRunner runner(h0, rho1, cfg.phase_cycle, cfg.acquisition);
  std::optional<Spectrum> reference;
  if (cfg.readout == Readout::kDifference) reference = runner.Reference();

  SpectrumStack stack;
  stack.rows.resize(img.rows);
  const double start = cfg.StartFor(img.size());
  for (int r = 0; r < img.rows; ++r) {
    stack.row_freqs.push_back(start + r * cfg.spacing_hz);
  }
  ParallelFor(img.rows, opts.jobs, [&](int r) {
    try {
      Spectrum s = runner.Run(pulse2[r], opts.mode);
      if (reference) Accumulate(s, *reference, -1.0);
      stack.rows[r] = std::move(s);
    } catch (const NumericalError& e) {
      throw NumericalError("row " + std::to_string(r) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("row " + std::to_string(r) + ": " + e.what());
    }
  });
  return stack;
}

// ---------------------------------------------------------------------------

std::vector<double> Fig2bConfig::Durations() const {
  std::vector<double> out;
  const int count = static_cast<int>(std::floor(dur2_max_s / dur2_step_s + 1e-9));
  for (int k = 0; k <= count; ++k) out.push_back(k * dur2_step_s);
  return out;
}

void Fig2bConfig::Validate() const {
  if (n_spins < kMinSpins || n_spins > kMaxSpins) {
    throw ValidationError("n_spins out of range");
  }
  if (!(coupling_bound_hz >= 0.0)) throw ValidationError("coupling bound must be >= 0");
  if (!(amp1_hz >= 0.0) || !(amp2_hz >= 0.0)) {
    throw ValidationError("amplitudes must be non-negative");
  }
  if (!(dur1_s > 0.0) || !(dt_s > 0.0) || !(dur2_step_s > 0.0) ||
      !(dur2_max_s >= 0.0)) {
    throw ValidationError("durations and dt must be positive");
  }
  if (phase_cycle.empty()) throw ValidationError("phase cycle must be non-empty");
  acquisition.Validate();
}

namespace {

int StepsOf(double duration_s, double dt_s) {
  return std::max(1, static_cast<int>(std::lround(duration_s / dt_s)));
}

}  // namespace

std::vector<SweepPoint> run_fig2b(const Fig2bConfig& cfg, PropagationMode mode,
                                  int jobs) {
  cfg.Validate();
  const SpinSystem sys = SpinSystem::Random(cfg.n_spins, cfg.coupling_bound_hz, cfg.seed);
  const StaticEigensystem h0(sys);
  const HarmonicSet hs1{{{cfg.freq1_hz, cfg.amp1_hz, 0.0}}};
  const Waveform pulse1 = synthesize(hs1, cfg.dur1_s, StepsOf(cfg.dur1_s, cfg.dt_s));
  CheckPulse(h0, pulse1, "pulse1");
  const DensityState rho1 = evolve(thermal_state(sys), h0, pulse1, mode);
  const TwoPulseRunner runner(h0, rho1, cfg.phase_cycle, cfg.acquisition);

  const std::vector<double> durations = cfg.Durations();
  std::vector<SweepPoint> points(durations.size());
  const double phase2 = std::remainder(kTwoPi * cfg.freq1_hz * cfg.dur1_s, kTwoPi);
  const HarmonicSet hs2{{{cfg.freq1_hz, cfg.amp2_hz, phase2 + cfg.phase_cycle.front()}}};
  auto pulse2_of = [&](double duration_s) {
    return duration_s > 0.0
               ? synthesize(hs2, duration_s, StepsOf(duration_s, cfg.dt_s))
               : Waveform::Empty();
  };
  // Every point shares dt, so one check covers the sweep.
  CheckPulse(h0, pulse2_of(durations.back()), "pulse2");
  ParallelFor(static_cast<int>(durations.size()), jobs, [&](int k) {
    SweepPoint& p = points[k];
    p.duration_s = durations[k];
    const Waveform pulse2 = pulse2_of(p.duration_s);
    p.spectrum = pulse2.empty()
                     ? runner.Reference()
                     : runner.RunWithPropagator(PulsePropagator(h0, pulse2, mode));
    p.signed_amplitude = p.spectrum.At(cfg.freq1_hz).real();
  });
  return points;
}

// ---------------------------------------------------------------------------

void ParallelFor(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  jobs = std::clamp(jobs, 1, count);
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
      for (int i = next++; i < count && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
          failed = true;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace spinphoto
