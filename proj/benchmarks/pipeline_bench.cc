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

#include <benchmark/benchmark.h>

#include "spinphoto/engine.h"
#include "spinphoto/experiments.h"
#include "spinphoto/signal.h"
#include "spinphoto/waveform.h"

namespace spinphoto {
namespace {

// 32x32 checkerboard: 512 harmonics, one second at 51200 steps.
void BM_SynthesizeCheckerboard(benchmark::State& state) {
  BitImage img = BitImage::Zeros(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) img.at(r, c) = (r + c) % 2;
  const HarmonicSet hs = bits_to_harmonics(img, 0.0, 20.0, 1.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(hs, 1.0, 51200).steps.data());
  }
}
BENCHMARK(BM_SynthesizeCheckerboard)->Unit(benchmark::kMillisecond);

void BM_Acquire(benchmark::State& state) {
  const StaticEigensystem h0(SpinSystem::Random(static_cast<int>(state.range(0)), 792.0, 1));
  const DensityState rho = evolve(thermal_state(h0.system()), h0, HardPulse(), PropagationMode::kExact);
  for (auto _ : state) {
    benchmark::DoNotOptimize(acquire(rho, h0, 0.5, 1.0 / 4096).samples.data());
  }
}
BENCHMARK(BM_Acquire)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_Spectrum(benchmark::State& state) {
  Fid fid;
  fid.dwell_s = 1.0 / 4096;
  fid.samples.assign(2048, Complex(0.0, -1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectrum(line_broaden(fid, 12.0), 4096).values.data());
  }
}
BENCHMARK(BM_Spectrum)->Unit(benchmark::kMicrosecond);

// One second of a 16-harmonic pulse at 8 spins, split mode.
void BM_EvolveDeskPulse(benchmark::State& state) {
  const SpinSystem sys = SpinSystem::Random(8, 792.0, 1);
  const StaticEigensystem h0(sys);
  BitImage img = BitImage::Zeros(4, 4);
  for (auto& b : img.bits) b = 1;
  const PhotographyConfig cfg = GetPhotographyPreset("desk-4x4").config;
  const Waveform wf = PhotographyPulse1(img, cfg, h0);
  const DensityState rho = thermal_state(sys);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve(rho, h0, wf, PropagationMode::kSplit).matrix.data());
  }
  state.counters["steps"] = wf.n_steps();
}
BENCHMARK(BM_EvolveDeskPulse)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
}  // namespace spinphoto

BENCHMARK_MAIN();
