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

#ifndef SPINPHOTO_TOOLS_COMMANDS_H_
#define SPINPHOTO_TOOLS_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>

#include "spinphoto/engine.h"

namespace spinphoto::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNumerical = 3,
  kNoSeparation = 4,
  kSelfCheckFailed = 5,
};

struct RunOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  PropagationMode mode = PropagationMode::kSplit;
  int jobs = 1;
};

int cmd_synth(const std::string& image_path, const RunOptions& opts);
int cmd_fig2b(const RunOptions& opts);
int cmd_photograph(const std::string& image_path, const RunOptions& opts,
                   bool self_check);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string Fnv1a64(const std::string& text);

}  // namespace spinphoto::cli

#endif  // SPINPHOTO_TOOLS_COMMANDS_H_
