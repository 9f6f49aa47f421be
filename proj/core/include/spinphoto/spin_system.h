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

#ifndef SPINPHOTO_SPIN_SYSTEM_H_
#define SPINPHOTO_SPIN_SYSTEM_H_

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace spinphoto {

inline constexpr int kMinSpins = 1;
inline constexpr int kMaxSpins = 12;
inline constexpr double kMaxCouplingHz = 1e6;

/// A cluster of n spin-1/2 nuclei with pairwise dipolar couplings.
///
/// Couplings and offsets are in Hz. The coupling table is stored in full and
/// must be symmetric with a zero diagonal.
struct SpinSystem {
  int n = 0;
  Eigen::MatrixXd couplings;
  Eigen::VectorXd offsets;
  std::optional<std::uint64_t> seed;

  /// Throws ValidationError when any invariant is broken.
  void Validate() const;

  /// Zero couplings and offsets.
  static SpinSystem Uncoupled(int n);

  /// Couplings drawn from random_couplings(n, bound_hz, seed), zero offsets.
  static SpinSystem Random(int n, double bound_hz, std::uint64_t seed);

  bool operator==(const SpinSystem&) const = default;
};

/// Symmetric n x n table with i.i.d. entries uniform in [-bound, +bound] and a
/// zero diagonal. Entries are drawn row by row over the upper triangle from a
/// 64-bit Mersenne Twister, so a seed gives the same table on every platform.
Eigen::MatrixXd random_couplings(int n, double bound_hz, std::uint64_t seed);

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
double unit_uniform(std::uint64_t word);

std::string SpinSystemToJson(const SpinSystem& sys);
SpinSystem SpinSystemFromJson(const std::string& text);

/// Either an explicit system (as written by SpinSystemToJson) or a random
/// one: {"n": 8, "coupling_bound_hz": 792, "seed": 1}. `seed_override`
/// replaces the document's seed; a random system without any seed is an
/// error.
SpinSystem SpinSystemFromSpec(const std::string& text,
                              std::optional<std::uint64_t> seed_override = {});

}  // namespace spinphoto

#endif  // SPINPHOTO_SPIN_SYSTEM_H_
