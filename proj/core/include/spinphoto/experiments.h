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

#ifndef SPINPHOTO_EXPERIMENTS_H_
#define SPINPHOTO_EXPERIMENTS_H_

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinphoto/engine.h"
#include "spinphoto/signal.h"
#include "spinphoto/spin_system.h"
#include "spinphoto/waveform.h"

namespace spinphoto {

struct Acquisition {
  double t_acq_s = 0.5;
  double dwell_s = 1.0 / 4096.0;
  double lb_hz = 12.0;
  int zero_fill = 4096;
  /// Free evolution between the last pulse and the first sample.
  double dead_time_s = 0.0;

  void Validate() const;
};

inline const std::vector<double> kDefaultPhaseCycle = {std::numbers::pi / 2,
                                                       -std::numbers::pi / 2};

struct ExperimentPlan {
  SpinSystem sys;
  std::optional<Waveform> pulse1;
  std::optional<Waveform> pulse2;
  /// Phase offsets of pulse 2 relative to pulse 1, one per cycle branch.
  std::vector<double> pulse2_phase_cycle = kDefaultPhaseCycle;
  Acquisition acquisition;
  PropagationMode mode = PropagationMode::kSplit;

  void Validate() const;
};

/// One spectrum per second-pulse reference frequency, on a shared axis.
struct SpectrumStack {
  std::vector<Spectrum> rows;
  std::vector<double> row_freqs;

  int size() const { return static_cast<int>(rows.size()); }
  void Validate() const;
};

/// thermal -> pulse1 -> acquire -> line broadening -> spectrum.
Spectrum run_single_pulse(const ExperimentPlan& plan);

/// Two-pulse sequence with phase cycling. Branch k applies pulse 2 rotated
/// by cycle[k] about z; its receiver phase follows the pulse-2 phase relative
/// to cycle[0] and its receiver sign alternates (+, -, +, ...). The branch sum
/// is divided by the branch count. With an even cycle the response that pulse
/// 2 produces on its own cancels exactly, while the pulse-1 response and
/// everything pulse 2 does to it survive.
Spectrum run_two_pulse(const ExperimentPlan& plan);

/// The same cycle with precomputed pieces, for sweeps that share them.
class TwoPulseRunner {
 public:
  TwoPulseRunner(const StaticEigensystem& h0, const DensityState& after_pulse1,
                 std::vector<double> phase_cycle, Acquisition acquisition);

  /// `pulse2` is given in phase with pulse 1; the runner applies the cycle
  /// offsets. An empty waveform is allowed.
  Spectrum Run(const Waveform& pulse2, PropagationMode mode) const;
  /// Same, from the propagator of pulse 2 already rotated to cycle[0].
  Spectrum RunWithPropagator(const CMatrix& u2) const;
  /// Output of the cycle for a pulse 2 of zero length.
  Spectrum Reference() const;

 private:
  Spectrum Acquire(const DensityState& state) const;

  const StaticEigensystem& h0_;
  std::vector<double> cycle_;
  std::vector<DensityState> branches_;
  Acquisition acquisition_;
};

/// The rf vector of every step rotated by `phase_rad` about z.
Waveform RotatePhase(Waveform wf, double phase_rad);

/// Rectangular pulse about +x with the given flip angle.
Waveform HardPulse(double flip_deg = 90.0, double duration_s = 5e-6,
                   int n_steps = 32);

/// Smallest multiple of `quantum` steps whose dt satisfies StepSizeAdequate
/// for a pulse of the given duration and peak rf.
int AdequateSteps(const StaticEigensystem& h0, double duration_s,
                  double peak_rf_hz, int quantum = 256);

enum class Readout {
  kCycled,      // the phase-cycled two-pulse spectrum itself
  kDifference,  // cycled spectrum minus the pulse-1-only spectrum
};

std::string_view ToString(Readout r);
Readout ParseReadout(std::string_view text);

struct PhotographyConfig {
  double spacing_hz = 40.0;
  std::optional<double> f_start_hz;  // centered on the carrier when unset
  double amp1_hz = 1.2;
  double dur1_s = 1.0;
  int steps1 = 0;  // 0: choose from the step-size rule
  double amp2_hz = 9.0;
  double dur2_s = 0.05;
  int steps2 = 0;
  /// Harmonic phases of pulse 1 are randomized with this seed when set.
  std::optional<std::uint64_t> phase_seed;
  std::vector<double> phase_cycle = kDefaultPhaseCycle;
  Readout readout = Readout::kCycled;
  Acquisition acquisition;
  /// Optional per-slot masks: a zero removes that slot's harmonic from the
  /// corresponding pulse.
  std::optional<BitImage> pulse1_mask;
  std::optional<BitImage> pulse2_mask;

  double StartFor(int slots) const;
  void Validate(const BitImage& img) const;
};

/// Pulse 1 carrying the whole image.
Waveform PhotographyPulse1(const BitImage& img, const PhotographyConfig& cfg,
                           const StaticEigensystem& h0);
/// Pulse 2 retrieving one row: a comb at that row's slots, each tooth
/// phase-continuous with the pulse-1 harmonic it addresses.
Waveform PhotographyPulse2(const BitImage& img, const PhotographyConfig& cfg,
                           const StaticEigensystem& h0, int row);

struct PhotographyOptions {
  PropagationMode mode = PropagationMode::kSplit;
  int jobs = 1;
};

/// Imprints the image with pulse 1 once, then retrieves every row with its
/// own pulse 2. Rows run concurrently up to `jobs`; the stack is ordered by
/// row regardless.
SpectrumStack run_photography(const BitImage& img, const SpinSystem& sys,
                              const PhotographyConfig& cfg,
                              const PhotographyOptions& opts = {});

struct SweepPoint {
  double duration_s = 0.0;
  double signed_amplitude = 0.0;
  Spectrum spectrum;
};

struct Fig2bConfig {
  int n_spins = 8;
  double coupling_bound_hz = 792.0;
  std::uint64_t seed = 1;
  double amp1_hz = 1.0;
  double dur1_s = 1.0;
  double freq1_hz = 0.0;
  double amp2_hz = 4.0;
  double dur2_max_s = 0.20;
  double dur2_step_s = 0.01;
  double dt_s = 1.0 / 51200.0;
  std::vector<double> phase_cycle = kDefaultPhaseCycle;
  Acquisition acquisition;

  std::vector<double> Durations() const;
  void Validate() const;
};

/// Amplitude of the pulse-1 peak against the length of pulse 2.
std::vector<SweepPoint> run_fig2b(const Fig2bConfig& cfg, PropagationMode mode,
                                  int jobs = 1);

// JSON documents. Every physical quantity carries a _hz, _s or _rad suffix;
// unknown keys are rejected. Parsers start from `base` and override the keys
// present.
std::string AcquisitionToJson(const Acquisition& acq);
std::string PhotographyConfigToJson(const PhotographyConfig& cfg);
PhotographyConfig PhotographyConfigFromJson(const std::string& text,
                                            const PhotographyConfig& base = {});
std::string Fig2bConfigToJson(const Fig2bConfig& cfg);
Fig2bConfig Fig2bConfigFromJson(const std::string& text,
                                const Fig2bConfig& base = {});
/// Index of a stack written as one spectrum file per row.
std::string StackIndexJson(const SpectrumStack& stack,
                           const std::vector<std::string>& files);

struct PhotographyPreset {
  std::string name;
  PhotographyConfig config;
  int rows = 0;
  int cols = 0;
  int n_spins = 0;  // 0: synthesis only, no simulation
  double coupling_bound_hz = 0.0;
  std::uint64_t seed = 0;
};

/// "paper-echo" (32x32 synthesis parameters) or "desk-4x4" (full pipeline).
/// Throws ValidationError for other names.
PhotographyPreset GetPhotographyPreset(std::string_view name);

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown (by lowest index) is rethrown after all work stops.
void ParallelFor(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace spinphoto

#endif  // SPINPHOTO_EXPERIMENTS_H_
