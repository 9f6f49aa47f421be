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

// Drives the spinphoto executable end to end and inspects what it writes.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "spinphoto/waveform.h"

namespace {

namespace fs = std::filesystem;

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void Spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(::testing::TempDir()) / (std::string("spinphoto_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the tool with `args`; stderr is kept in last_stderr_.
  int Run(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(SPINPHOTO_CLI) + " " + args + " > /dev/null 2> " +
                            err.string();
    const int status = std::system(cmd.c_str());
    last_stderr_ = Slurp(err);
    fs::remove(err);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static std::string Data(const std::string& name) {
    return (fs::path(SPINPHOTO_DATA_DIR) / name).string();
  }

  // Small but complete photography setup that runs in seconds.
  fs::path SmallPhotoConfig() {
    const fs::path p = dir_ / "small.json";
    Spit(p, R"({
      "spin_system": {"n": 4, "coupling_bound_hz": 792, "seed": 2},
      "photography": {"dur1_s": 0.1, "amp1_hz": 6.0, "dur2_s": 0.01, "amp2_hz": 9.0,
                      "readout": "difference",
                      "acquisition": {"t_acq_s": 0.125, "zero_fill": 1024}}
    })");
    Spit(dir_ / "img.pbm", "P1\n2 2\n1 0\n1 1\n");
    return p;
  }

  fs::path dir_;
  std::string last_stderr_;
};

TEST_F(CliTest, SynthFullScalePresetIsFiftyThousandSteps) {
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("synth " + Data("demo32.pbm") + " --preset paper-echo --out " + out.string()), 0)
      << last_stderr_;
  const auto side = nlohmann::json::parse(Slurp(out / "pulse1.json"));
  EXPECT_EQ(side.at("n_steps").get<int>(), 51200);
  EXPECT_DOUBLE_EQ(side.at("duration_s").get<double>(), 1.0);
}

TEST_F(CliTest, SynthZeroImageWarnsAndWritesZeros) {
  Spit(dir_ / "zero.pbm", "P1\n4 4\n0000\n0000\n0000\n0000\n");
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("synth " + (dir_ / "zero.pbm").string() + " --preset desk-4x4 --out " +
                out.string()),
            0);
  EXPECT_NE(last_stderr_.find("warn"), std::string::npos);
  const spinphoto::Waveform wf =
      spinphoto::WaveformFromFiles(Slurp(out / "pulse1.csv"), Slurp(out / "pulse1.json"));
  for (const auto& s : wf.steps) {
    EXPECT_EQ(s.bx_hz, 0.0);
    EXPECT_EQ(s.by_hz, 0.0);
  }
}

TEST_F(CliTest, SynthDeskWaveformRoundTripsByteForByte) {
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("synth " + Data("desk4x4.pbm") + " --preset desk-4x4 --out " + out.string()), 0)
      << last_stderr_;
  const std::string csv = Slurp(out / "pulse1.csv"), side = Slurp(out / "pulse1.json");
  const spinphoto::Waveform wf = spinphoto::WaveformFromFiles(csv, side);
  EXPECT_EQ(spinphoto::WaveformToCsv(wf), csv);
  EXPECT_EQ(spinphoto::WaveformSidecarJson(wf), side);
  const auto manifest = nlohmann::json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("preset"), "desk-4x4");
  EXPECT_EQ(manifest.at("seed").get<int>(), 1);
}

TEST_F(CliTest, UndersampledConfigFailsWithoutOutput) {
  Spit(dir_ / "bad.json", R"({"photography": {"steps1": 8}})");
  const fs::path out = dir_ / "o";
  EXPECT_EQ(Run("synth " + Data("desk4x4.pbm") + " --preset desk-4x4 --config " +
                (dir_ / "bad.json").string() + " --out " + out.string()),
            2);
  EXPECT_NE(last_stderr_.find("undersampled"), std::string::npos) << last_stderr_;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, ValidationErrorsExitTwo) {
  EXPECT_EQ(Run("synth " + Data("desk4x4.pbm") + " --preset nope --out " + dir_.string()), 2);
  EXPECT_EQ(Run("fig2b --mode trotter"), 2);
  EXPECT_EQ(Run("photograph " + Data("demo32.pbm") + " --preset paper-echo --out " +
                (dir_ / "o").string()),
            2);
  Spit(dir_ / "typo.json", R"({"photografy": {}})");
  EXPECT_EQ(Run("synth " + Data("desk4x4.pbm") + " --config " + (dir_ / "typo.json").string()),
            2);
  EXPECT_EQ(Run("--help"), 0);
}

TEST_F(CliTest, PhotographIsDeterministicAcrossRunsAndJobs) {
  const fs::path cfg = SmallPhotoConfig();
  const std::string base = "photograph " + (dir_ / "img.pbm").string() + " --no-self-check --config " +
                           cfg.string();
  ASSERT_EQ(Run(base + " --jobs 1 --out " + (dir_ / "a").string()), 0) << last_stderr_;
  ASSERT_EQ(Run(base + " --jobs 2 --out " + (dir_ / "b").string()), 0) << last_stderr_;
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) names.push_back(e.path().filename());
  EXPECT_GE(names.size(), 10u);
  for (const std::string& name : names) {
    EXPECT_EQ(Slurp(dir_ / "a" / name), Slurp(dir_ / "b" / name)) << name;
  }
  const auto manifest = nlohmann::json::parse(Slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest.at("seed").get<int>(), 2);
  EXPECT_EQ(manifest.at("mode"), "split");
  EXPECT_EQ(manifest.at("config_hash").get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_TRUE(manifest.at("formats").contains("stack"));
  const auto decode = nlohmann::json::parse(Slurp(dir_ / "a" / "decode.json"));
  EXPECT_TRUE(decode.contains("bit_errors"));
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  const fs::path cfg = SmallPhotoConfig();
  const std::string base = "photograph " + (dir_ / "img.pbm").string() + " --no-self-check --config " +
                           cfg.string();
  ASSERT_EQ(Run(base + " --seed 5 --out " + (dir_ / "a").string()), 0) << last_stderr_;
  const auto manifest = nlohmann::json::parse(Slurp(dir_ / "a" / "manifest.json"));
  EXPECT_EQ(manifest.at("seed").get<int>(), 5);
  EXPECT_NE(Slurp(dir_ / "a" / "spin_system.json").find("\"seed\": 5"), std::string::npos);
}

TEST_F(CliTest, Fig2bDefaultSweepHasTwentyOneRows) {
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("fig2b --preset fig2b --out " + out.string()), 0) << last_stderr_;
  std::istringstream summary(Slurp(out / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line, "duration_s,signed_amplitude");
  int rows = 0;
  while (std::getline(summary, line)) ++rows;
  EXPECT_EQ(rows, 21);
  EXPECT_TRUE(fs::exists(out / "spectrum_20.csv"));
  EXPECT_TRUE(fs::exists(out / "spectrum_20.json"));
}

TEST_F(CliTest, Fig2bExactAndSplitSummariesAgree) {
  ASSERT_EQ(Run("fig2b --mode exact --out " + (dir_ / "e").string()), 0) << last_stderr_;
  ASSERT_EQ(Run("fig2b --mode split --out " + (dir_ / "s").string()), 0) << last_stderr_;
  auto column = [&](const fs::path& p) {
    std::istringstream in(Slurp(p / "summary.csv"));
    std::string line;
    std::getline(in, line);
    std::vector<double> v;
    while (std::getline(in, line)) v.push_back(std::stod(line.substr(line.find(',') + 1)));
    return v;
  };
  const std::vector<double> e = column(dir_ / "e"), s = column(dir_ / "s");
  ASSERT_EQ(e.size(), s.size());
  double scale = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    scale = std::max(scale, std::abs(e[k]));
    diff = std::max(diff, std::abs(e[k] - s[k]));
  }
  EXPECT_LT(diff, 1e-5 * scale);
}

TEST_F(CliTest, Fig2bSweepIsDeterministic) {
  Spit(dir_ / "short.json", R"({"n_spins": 4, "dur1_s": 0.2, "dur2_max_s": 0.03})");
  const std::string base = "fig2b --config " + (dir_ / "short.json").string() + " --seed 9";
  ASSERT_EQ(Run(base + " --jobs 1 --out " + (dir_ / "a").string()), 0) << last_stderr_;
  ASSERT_EQ(Run(base + " --jobs 3 --out " + (dir_ / "b").string()), 0) << last_stderr_;
  for (const char* name : {"summary.csv", "manifest.json", "spectrum_03.csv", "spin_system.json"}) {
    EXPECT_EQ(Slurp(dir_ / "a" / name), Slurp(dir_ / "b" / name)) << name;
  }
}

TEST_F(CliTest, DeskPresetRecoversTheImage) {
  const fs::path out = dir_ / "o";
  ASSERT_EQ(Run("photograph " + Data("desk4x4.pbm") + " --preset desk-4x4 --out " + out.string()),
            0)
      << last_stderr_;
  const auto decode = nlohmann::json::parse(Slurp(out / "decode.json"));
  EXPECT_EQ(decode.at("bit_errors").get<int>(), 0);
  EXPECT_EQ(Slurp(out / "recovered.pbm"),
            spinphoto::FormatPbm(spinphoto::ParsePbm(Slurp(Data("desk4x4.pbm")))));
}

}  // namespace
