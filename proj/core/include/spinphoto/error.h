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

#ifndef SPINPHOTO_ERROR_H_
#define SPINPHOTO_ERROR_H_

#include <functional>
#include <stdexcept>
#include <string>

namespace spinphoto {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: sizes, ranges, malformed files, inconsistent configs.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A waveform sampling rate too low for its highest harmonic.
class AliasingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A requested frequency or index falls outside the available axis.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical contract (unitarity, Hermiticity, trace) was violated.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The decoder found no separation between the two bit classes.
class NoSeparationError : public Error {
 public:
  using Error::Error;
};

/// Receives non-fatal diagnostics. The default handler writes to stderr.
using WarningHandler = std::function<void(const std::string&)>;

/// Installs `handler` (or restores the default when empty); returns the
/// previous one. Not synchronized with concurrent Warn() calls.
WarningHandler SetWarningHandler(WarningHandler handler);

void Warn(const std::string& message);

}  // namespace spinphoto

#endif  // SPINPHOTO_ERROR_H_
