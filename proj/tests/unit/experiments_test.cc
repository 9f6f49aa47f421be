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

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.h"
#include "spinphoto/error.h"
#include "spinphoto/experiments.h"

namespace spinphoto {
namespace {

constexpr double kPi = std::numbers::pi;

double MaxDiff(const Spectrum& a, const Spectrum& b) {
  double m = 0.0;
  for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
  return m;
}

Acquisition ShortAcquisition() {
  Acquisition acq;
  acq.t_acq_s = 0.125;
  acq.zero_fill = 1024;
  return acq;
}

// Silences step-size warnings for the duration of a test.
class QuietWarnings {
 public:
  QuietWarnings() : previous_(SetWarningHandler([](const std::string&) {})) {}
  ~QuietWarnings() { SetWarningHandler(previous_); }

 private:
  WarningHandler previous_;
};

ExperimentPlan FourSpinPlan() {
  ExperimentPlan plan;
  plan.sys = SpinSystem::Random(4, 792.0, 3);
  plan.acquisition = ShortAcquisition();
  plan.mode = PropagationMode::kExact;
  plan.pulse1 = synthesize(HarmonicSet{{{-40.0, 6.0, 0.0}, {0.0, 6.0, 0.0}, {40.0, 6.0, 0.0}}},
                           0.1, 4096);
  return plan;
}

TEST(SinglePulseTest, ZeroPulseGivesZeroSpectrum) {
  ExperimentPlan plan = FourSpinPlan();
  plan.pulse1 = synthesize(HarmonicSet{{{0.0, 0.0, 0.0}}}, 0.1, 256);
  EXPECT_EQ(run_single_pulse(plan).MaxAbs(), 0.0);
}

TEST(SinglePulseTest, RejectsSecondPulseAndEmptyPlans) {
  ExperimentPlan plan = FourSpinPlan();
  plan.pulse2 = Waveform::Empty();
  EXPECT_THROW(run_single_pulse(plan), ValidationError);
  plan.pulse1.reset();
  plan.pulse2.reset();
  EXPECT_THROW(run_single_pulse(plan), ValidationError);
}

TEST(TwoPulseTest, EmptySecondPulseReducesToSinglePulse) {
  ExperimentPlan plan = FourSpinPlan();
  const Spectrum single = run_single_pulse(plan);
  plan.pulse2 = Waveform::Empty();
  const Spectrum two = run_two_pulse(plan);
  EXPECT_LT(MaxDiff(single, two), 1e-15 * single.MaxAbs() + 1e-18);
}

TEST(TwoPulseTest, MatchesExplicitPhaseCycle) {
  // Oracle: run every branch literally. Branch k applies pulse 2 rotated by
  // cycle[k], detects with receiver phase exp(-i (cycle[k] - cycle[0])) and
  // alternating sign, and the branches are averaged.
  QuietWarnings quiet;
  ExperimentPlan plan = FourSpinPlan();
  plan.acquisition.lb_hz = 0.0;
  const Waveform pulse2 = synthesize(HarmonicSet{{{-40.0, 9.0, 0.2}, {40.0, 9.0, 1.4}}}, 0.02, 512);
  plan.pulse2 = pulse2;
  plan.pulse2_phase_cycle = {kPi / 2, -kPi / 2, 0.3, 2.0};
  const Spectrum got = run_two_pulse(plan);

  const CMatrix h0 = oracle::Hamiltonian(plan.sys.couplings, plan.sys.offsets);
  const int n = plan.sys.n;
  auto evolve_dense = [&](CMatrix rho, const Waveform& wf) {
    for (const RfStep& s : wf.steps) {
      const CMatrix u = oracle::Propagator(
          h0 + s.bx_hz * oracle::Total(n, 'x') + s.by_hz * oracle::Total(n, 'y'), wf.dt());
      rho = u * rho * u.adjoint();
    }
    return rho;
  };
  const CMatrix rho1 = evolve_dense(oracle::Total(n, 'z') / 16.0, *plan.pulse1);
  const double dwell = plan.acquisition.dwell_s;
  const int count = static_cast<int>(std::lround(plan.acquisition.t_acq_s / dwell));
  std::vector<Complex> sum(count, 0.0);
  const auto& cycle = plan.pulse2_phase_cycle;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    const CMatrix rho2 = evolve_dense(rho1, RotatePhase(pulse2, cycle[k]));
    const std::vector<Complex> fid = oracle::Fid(h0, rho2, dwell, count);
    const Complex weight = ((k % 2 == 0) ? 1.0 : -1.0) / static_cast<double>(cycle.size()) *
                           std::polar(1.0, -(cycle[k] - cycle[0]));
    for (int m = 0; m < count; ++m) sum[m] += weight * fid[m];
  }
  Fid fid;
  fid.dwell_s = dwell;
  fid.samples = sum;
  const Spectrum want = spectrum(fid, plan.acquisition.zero_fill);
  EXPECT_LT(MaxDiff(got, want), 1e-10 * want.MaxAbs());
}

TEST(TwoPulseTest, CycleCancelsTheDirectResponse) {
  // Pulse 1 of zero amplitude: whatever pulse 2 excites on its own is removed.
  QuietWarnings quiet;
  ExperimentPlan plan = FourSpinPlan();
  const Spectrum full_single = run_single_pulse(plan);
  const Waveform pulse2 = synthesize(HarmonicSet{{{-40.0, 9.0, 0.0}, {40.0, 9.0, 0.0}}}, 0.02, 512);
  plan.pulse2 = pulse2;
  const double scale = run_two_pulse(plan).MaxAbs();
  ASSERT_GT(scale, 0.0);
  ASSERT_GT(full_single.MaxAbs(), 0.0);

  plan.pulse1 = synthesize(HarmonicSet{{{0.0, 0.0, 0.0}}}, 0.1, 4096);
  EXPECT_LT(run_two_pulse(plan).MaxAbs(), 1e-8 * scale);
  // Without the cycle the direct response is plainly there.
  plan.pulse2_phase_cycle = {kPi / 2};
  EXPECT_GT(run_two_pulse(plan).MaxAbs(), 1e-3 * scale);
}

TEST(TwoPulseTest, RunnerReferenceIsTheEmptyPulse) {
  const ExperimentPlan plan = FourSpinPlan();
  const StaticEigensystem h0(plan.sys);
  const DensityState rho1 = evolve(thermal_state(plan.sys), h0, *plan.pulse1, plan.mode);
  const TwoPulseRunner runner(h0, rho1, kDefaultPhaseCycle, plan.acquisition);
  EXPECT_EQ(MaxDiff(runner.Run(Waveform::Empty(), plan.mode), runner.Reference()), 0.0);
  EXPECT_LT(MaxDiff(runner.Reference(), run_single_pulse(plan)), 1e-15);
}

TEST(HelpersTest, HardPulseFlipAngle) {
  const Waveform wf = HardPulse();
  EXPECT_EQ(wf.n_steps(), 32);
  EXPECT_DOUBLE_EQ(wf.duration_s, 5e-6);
  EXPECT_DOUBLE_EQ(wf.steps[0].bx_hz * wf.duration_s, 0.25);
}

TEST(HelpersTest, RotatePhaseTurnsXIntoY) {
  const Waveform wf = RotatePhase(Waveform::Constant(2.0, 0.0, 1.0, 3), kPi / 2);
  EXPECT_NEAR(wf.steps[1].bx_hz, 0.0, 1e-15);
  EXPECT_NEAR(wf.steps[1].by_hz, 2.0, 1e-15);
}

TEST(HelpersTest, AdequateStepsMeetsTheRule) {
  const StaticEigensystem h0(SpinSystem::Random(8, 792.0, 1));
  const int steps = AdequateSteps(h0, 0.5, 38.4);
  EXPECT_EQ(steps % 256, 0);
  EXPECT_TRUE(StepSizeAdequate(h0, Waveform::Constant(38.4, 0.0, 0.5, steps)));
  EXPECT_FALSE(StepSizeAdequate(h0, Waveform::Constant(38.4, 0.0, 0.5, steps - 256)));
}

TEST(PhotographyConfigTest, CenteredStartAndValidation) {
  PhotographyConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.StartFor(16), -300.0);
  cfg.f_start_hz = 12.5;
  EXPECT_DOUBLE_EQ(cfg.StartFor(16), 12.5);
  const BitImage img = BitImage::Zeros(4, 4);
  cfg.pulse2_mask = BitImage::Zeros(2, 2);
  EXPECT_THROW(cfg.Validate(img), ValidationError);
  cfg.pulse2_mask.reset();
  cfg.phase_cycle.clear();
  EXPECT_THROW(cfg.Validate(img), ValidationError);
}

TEST(PhotographyConfigTest, JsonRoundTripAndStrictKeys) {
  PhotographyConfig cfg;
  cfg.spacing_hz = 33.0;
  cfg.f_start_hz = -100.0;
  cfg.phase_seed = 77;
  cfg.readout = Readout::kDifference;
  cfg.acquisition.lb_hz = 8.0;
  const std::string text = PhotographyConfigToJson(cfg);
  EXPECT_EQ(PhotographyConfigToJson(PhotographyConfigFromJson(text)), text);
  EXPECT_THROW(PhotographyConfigFromJson(R"({"spacing": 40})"), ValidationError);
  EXPECT_THROW(PhotographyConfigFromJson(R"({"readout": "magnitude"})"), ValidationError);
  EXPECT_THROW(PhotographyConfigFromJson(R"({"acquisition": {"lb": 1}})"), ValidationError);
}

TEST(PhotographyPresetTest, FullScaleParameters) {
  const PhotographyPreset p = GetPhotographyPreset("paper-echo");
  EXPECT_EQ(p.rows, 32);
  EXPECT_EQ(p.cols, 32);
  EXPECT_EQ(p.n_spins, 0);
  EXPECT_DOUBLE_EQ(p.config.spacing_hz, 20.0);
  EXPECT_DOUBLE_EQ(p.config.amp1_hz, 1.2);
  EXPECT_DOUBLE_EQ(p.config.dur1_s, 1.0);
  EXPECT_EQ(p.config.steps1, 51200);
  EXPECT_DOUBLE_EQ(p.config.amp2_hz, 9.0);
  EXPECT_DOUBLE_EQ(p.config.dur2_s, 0.05);
  // 32 rows 20 Hz apart give a 640 Hz comb; 31 reference shifts of 20 Hz.
  EXPECT_DOUBLE_EQ(p.config.spacing_hz * p.rows, 640.0);
  EXPECT_THROW(GetPhotographyPreset("desk-8x8"), ValidationError);
}

TEST(PhotographyPulseTest, SecondPulseContinuesPulseOnePhase) {
  const BitImage img = ParsePbm("P1\n2 2\n1 1\n0 1\n");
  PhotographyConfig cfg;
  cfg.spacing_hz = 40.0;
  cfg.f_start_hz = -57.0;
  cfg.dur1_s = 0.3;
  cfg.steps1 = 512;
  cfg.dur2_s = 0.02;
  cfg.steps2 = 256;
  const StaticEigensystem h0(SpinSystem::Uncoupled(2));
  const Waveform w1 = PhotographyPulse1(img, cfg, h0);
  for (int r = 0; r < 2; ++r) {
    // Evaluate the slot harmonics of this row from pulse 1's definition at
    // times continuing past dur1.
    const Waveform w2 = PhotographyPulse2(img, cfg, h0, r);
    for (int s = 0; s < w2.n_steps(); s += 17) {
      const double t = cfg.dur1_s + (s + 0.5) * w2.dt();
      double bx = 0.0, by = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double f = SlotFrequency(-57.0, 40.0, SlotIndex(2, r, c));
        bx += cfg.amp2_hz * std::cos(2 * kPi * f * t);
        by += cfg.amp2_hz * std::sin(2 * kPi * f * t);
      }
      EXPECT_NEAR(w2.steps[s].bx_hz, bx, 1e-9);
      EXPECT_NEAR(w2.steps[s].by_hz, by, 1e-9);
    }
  }
  EXPECT_EQ(w1.n_steps(), 512);
}

TEST(PhotographyPulseTest, MasksRemoveSlots) {
  const BitImage img = ParsePbm("P1\n2 2\n1 1\n1 1\n");
  PhotographyConfig cfg;
  cfg.steps1 = cfg.steps2 = 1024;
  BitImage mask = ParsePbm("P1\n2 2\n1 0\n1 1\n");
  cfg.pulse1_mask = mask;
  const StaticEigensystem h0(SpinSystem::Uncoupled(2));
  PhotographyConfig expected = cfg;
  expected.pulse1_mask.reset();
  EXPECT_EQ(PhotographyPulse1(img, cfg, h0),
            PhotographyPulse1(ParsePbm("P1\n2 2\n1 0\n1 1\n"), expected, h0));
  cfg.pulse2_mask = mask;
  // Row 0 keeps only column 0, i.e. a single tooth of constant magnitude.
  const Waveform w2 = PhotographyPulse2(img, cfg, h0, 0);
  for (const RfStep& s : w2.steps) EXPECT_NEAR(std::hypot(s.bx_hz, s.by_hz), cfg.amp2_hz, 1e-12);
}

TEST(PhotographyTest, ZeroImageGivesEmptyStack) {
  QuietWarnings quiet;
  PhotographyConfig cfg;
  cfg.acquisition = ShortAcquisition();
  cfg.dur1_s = 0.1;
  cfg.dur2_s = 0.01;
  const SpectrumStack stack =
      run_photography(BitImage::Zeros(2, 2), SpinSystem::Random(4, 792.0, 1), cfg);
  ASSERT_EQ(stack.size(), 2);
  for (const Spectrum& s : stack.rows) EXPECT_LT(s.MaxAbs(), 1e-8);
  EXPECT_DOUBLE_EQ(stack.row_freqs[1] - stack.row_freqs[0], cfg.spacing_hz);
}

TEST(PhotographyTest, ResultDoesNotDependOnJobs) {
  QuietWarnings quiet;
  PhotographyConfig cfg;
  cfg.acquisition = ShortAcquisition();
  cfg.dur1_s = 0.1;
  cfg.dur2_s = 0.01;
  cfg.readout = Readout::kDifference;
  const BitImage img = ParsePbm("P1\n2 2\n1 0\n1 1\n");
  const SpinSystem sys = SpinSystem::Random(4, 792.0, 2);
  const SpectrumStack a = run_photography(img, sys, cfg, {PropagationMode::kSplit, 1});
  const SpectrumStack b = run_photography(img, sys, cfg, {PropagationMode::kSplit, 3});
  ASSERT_EQ(a.size(), b.size());
  for (int r = 0; r < a.size(); ++r) EXPECT_EQ(a.rows[r].values, b.rows[r].values);
  EXPECT_NO_THROW(a.Validate());
}

TEST(PhotographyTest, ErrorsCarryTheRow) {
  PhotographyConfig cfg;
  cfg.acquisition = ShortAcquisition();
  cfg.dur1_s = 0.1;
  cfg.steps1 = 1024;
  cfg.dur2_s = 0.01;
  cfg.steps2 = 1;  // far too few for the comb
  try {
    run_photography(ParsePbm("P1\n2 2\n1 0\n1 1\n"), SpinSystem::Random(4, 792.0, 2), cfg);
    FAIL() << "expected an aliasing error";
  } catch (const AliasingError&) {
    SUCCEED();
  }
}

TEST(Fig2bConfigTest, TwentyOneDurations) {
  const Fig2bConfig cfg;
  const std::vector<double> d = cfg.Durations();
  ASSERT_EQ(d.size(), 21u);
  EXPECT_EQ(d.front(), 0.0);
  EXPECT_NEAR(d.back(), 0.20, 1e-15);
  EXPECT_NEAR(1.0 / cfg.dt_s, 51200.0, 1e-9);
  EXPECT_EQ(Fig2bConfigToJson(Fig2bConfigFromJson(Fig2bConfigToJson(cfg))), Fig2bConfigToJson(cfg));
  EXPECT_THROW(Fig2bConfigFromJson(R"({"amp2": 4})"), ValidationError);
}

TEST(Fig2bTest, SmallSweep) {
  QuietWarnings quiet;
  Fig2bConfig cfg;
  cfg.n_spins = 4;
  cfg.dur1_s = 0.2;
  cfg.dur2_max_s = 0.02;
  cfg.acquisition = ShortAcquisition();
  const std::vector<SweepPoint> a = run_fig2b(cfg, PropagationMode::kSplit, 1);
  ASSERT_EQ(a.size(), 3u);
  // Duration 0 is the single-pulse response at the pulse-1 frequency.
  ExperimentPlan plan;
  plan.sys = SpinSystem::Random(4, 792.0, cfg.seed);
  plan.pulse1 = synthesize(HarmonicSet{{{0.0, cfg.amp1_hz, 0.0}}}, cfg.dur1_s,
                           static_cast<int>(std::lround(cfg.dur1_s / cfg.dt_s)));
  plan.acquisition = cfg.acquisition;
  EXPECT_NEAR(a[0].signed_amplitude, run_single_pulse(plan).At(0.0).real(), 1e-15);
  const std::vector<SweepPoint> b = run_fig2b(cfg, PropagationMode::kSplit, 3);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].signed_amplitude, b[k].signed_amplitude);
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(50);
  ParallelFor(50, 4, [&](int i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelForTest, RethrowsLowestFailingIndex) {
  try {
    ParallelFor(8, 1, [](int i) {
      if (i >= 5) throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "index 5");
  }
}

TEST(ReadoutTest, Names) {
  EXPECT_EQ(ParseReadout("difference"), Readout::kDifference);
  EXPECT_EQ(ToString(Readout::kCycled), "cycled");
  EXPECT_THROW(ParseReadout("abs"), ValidationError);
}

}  // namespace
}  // namespace spinphoto
