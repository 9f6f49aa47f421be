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

#include "spinphoto/error.h"

#include <cstdio>
#include <utility>

namespace spinphoto {

namespace {

void DefaultWarning(const std::string& message) {
  std::fprintf(stderr, "spinphoto: warning: %s\n", message.c_str());
}

WarningHandler& Handler() {
  static WarningHandler handler = DefaultWarning;
  return handler;
}

}  // namespace

WarningHandler SetWarningHandler(WarningHandler handler) {
  if (!handler) handler = DefaultWarning;
  return std::exchange(Handler(), std::move(handler));
}

void Warn(const std::string& message) { Handler()(message); }

}  // namespace spinphoto
