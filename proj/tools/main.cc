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

// spinphoto: synthesize imprinting pulses, reproduce the two-pulse sweep, and
// run the full imprint -> retrieve -> decode pipeline.

#include <cstdlib>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.h"
#include "spinphoto/error.h"

namespace {

using spinphoto::cli::RunOptions;

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("spinphoto");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SPINPHOTO_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
  spinphoto::SetWarningHandler(
      [](const std::string& message) { spdlog::warn("{}", message); });
}

struct Flags {
  std::string config, preset, out = ".", mode = "split";
  std::uint64_t seed = 0;
  int jobs = 0;
  CLI::Option* seed_opt = nullptr;
};

void AddCommon(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", f.preset, "Named parameter preset");
  cmd->add_option("--out", f.out, "Output directory");
  f.seed_opt = cmd->add_option("--seed", f.seed, "Seed for random couplings");
  cmd->add_option("--mode", f.mode, "Propagation mode")
      ->check(CLI::IsMember({"exact", "split"}));
  cmd->add_option("--jobs", f.jobs, "Concurrent rows or sweep points (0: all cores)")
      ->check(CLI::NonNegativeNumber);
}

RunOptions ToOptions(const Flags& f) {
  RunOptions o;
  if (!f.config.empty()) o.config_path = f.config;
  if (!f.preset.empty()) o.preset = f.preset;
  o.out_dir = f.out;
  if (f.seed_opt && f.seed_opt->count() > 0) o.seed = f.seed;
  o.mode = spinphoto::ParsePropagationMode(f.mode);
  o.jobs = f.jobs > 0 ? f.jobs
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = spinphoto::cli;
  SetupLogging();

  CLI::App app{"NMR molecular photography simulator"};
  app.require_subcommand(1);

  Flags synth_flags, fig2b_flags, photo_flags;
  std::string synth_image, photo_image;
  bool no_self_check = false;

  CLI::App* synth = app.add_subcommand("synth", "Write the imprinting pulse for an image");
  synth->add_option("image", synth_image, "P1 PBM image")->required();
  AddCommon(synth, synth_flags);

  CLI::App* fig2b = app.add_subcommand("fig2b", "Sweep the length of the locking pulse");
  AddCommon(fig2b, fig2b_flags);

  CLI::App* photo = app.add_subcommand("photograph", "Imprint, retrieve and decode an image");
  photo->add_option("image", photo_image, "P1 PBM image")->required();
  photo->add_flag("--no-self-check", no_self_check,
                  "Exit 0 even when the decoded image differs from the input");
  AddCommon(photo, photo_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kValidation;
  }

  try {
    if (*synth) return cli::cmd_synth(synth_image, ToOptions(synth_flags));
    if (*fig2b) return cli::cmd_fig2b(ToOptions(fig2b_flags));
    if (*photo) return cli::cmd_photograph(photo_image, ToOptions(photo_flags), !no_self_check);
  } catch (const spinphoto::ValidationError& e) {
    spdlog::error("{}", e.what());
    return cli::kValidation;
  } catch (const spinphoto::NumericalError& e) {
    spdlog::error("numerical contract violated: {}", e.what());
    return cli::kNumerical;
  } catch (const spinphoto::NoSeparationError& e) {
    spdlog::error("decode: {}", e.what());
    return cli::kNoSeparation;
  }
  return cli::kValidation;
}
