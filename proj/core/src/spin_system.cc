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

#include "spinphoto/spin_system.h"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "spinphoto/error.h"

namespace spinphoto {

void SpinSystem::Validate() const {
  if (n < kMinSpins || n > kMaxSpins) {
    throw ValidationError("spin count " + std::to_string(n) + " outside [" +
                          std::to_string(kMinSpins) + ", " +
                          std::to_string(kMaxSpins) + "]");
  }
  if (couplings.rows() != n || couplings.cols() != n) {
    throw ValidationError("coupling table must be n x n");
  }
  if (offsets.size() != n) {
    throw ValidationError("offset table must have n entries");
  }
  for (int i = 0; i < n; ++i) {
    if (couplings(i, i) != 0.0) {
      throw ValidationError("coupling table diagonal must be zero");
    }
    if (!std::isfinite(offsets(i)) || std::abs(offsets(i)) > kMaxCouplingHz) {
      throw ValidationError("offset of spin " + std::to_string(i) +
                            " is not a finite value within 1e6 Hz");
    }
    for (int j = 0; j < n; ++j) {
      const double d = couplings(i, j);
      if (!std::isfinite(d) || std::abs(d) > kMaxCouplingHz) {
        throw ValidationError("coupling (" + std::to_string(i) + ", " +
                              std::to_string(j) +
                              ") is not a finite value within 1e6 Hz");
      }
      if (d != couplings(j, i)) {
        throw ValidationError("coupling table is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) +
                              ")");
      }
    }
  }
}

SpinSystem SpinSystem::Uncoupled(int n) {
  if (n < kMinSpins || n > kMaxSpins) {
    throw ValidationError("spin count out of range");
  }
  return SpinSystem{n, Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
                    std::nullopt};
}

SpinSystem SpinSystem::Random(int n, double bound_hz, std::uint64_t seed) {
  SpinSystem sys = Uncoupled(n);
  sys.couplings = random_couplings(n, bound_hz, seed);
  sys.seed = seed;
  return sys;
}

double unit_uniform(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd random_couplings(int n, double bound_hz, std::uint64_t seed) {
  if (!(bound_hz > 0.0) || !std::isfinite(bound_hz)) {
    throw ValidationError("coupling bound must be positive");
  }
  if (n < 1) throw ValidationError("spin count must be positive");
  std::mt19937_64 engine(seed);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double u = unit_uniform(engine());
      d(i, j) = d(j, i) = bound_hz * (2.0 * u - 1.0);
    }
  }
  return d;
}

std::string SpinSystemToJson(const SpinSystem& sys) {
  nlohmann::ordered_json j;
  j["n"] = sys.n;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < sys.couplings.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < sys.couplings.cols(); ++k) row.push_back(sys.couplings(i, k));
    rows.push_back(row);
  }
  j["couplings"] = rows;
  auto offs = nlohmann::ordered_json::array();
  for (int i = 0; i < sys.offsets.size(); ++i) offs.push_back(sys.offsets(i));
  j["offsets"] = offs;
  if (sys.seed) j["seed"] = *sys.seed;
  return j.dump(2) + "\n";
}

SpinSystem SpinSystemFromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spin system JSON: ") + e.what());
  }
  SpinSystem sys;
  try {
    sys.n = j.at("n").get<int>();
    if (sys.n < kMinSpins || sys.n > kMaxSpins) {
      throw ValidationError("spin count out of range");
    }
    const auto& rows = j.at("couplings");
    if (!rows.is_array() || static_cast<int>(rows.size()) != sys.n) {
      throw ValidationError("couplings must be a full n x n array");
    }
    sys.couplings.resize(sys.n, sys.n);
    for (int i = 0; i < sys.n; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != sys.n) {
        throw ValidationError("couplings must be a full n x n array");
      }
      for (int k = 0; k < sys.n; ++k) sys.couplings(i, k) = rows[i][k].get<double>();
    }
    sys.offsets = Eigen::VectorXd::Zero(sys.n);
    if (j.contains("offsets")) {
      const auto& offs = j.at("offsets");
      if (!offs.is_array() || static_cast<int>(offs.size()) != sys.n) {
        throw ValidationError("offsets must have n entries");
      }
      for (int i = 0; i < sys.n; ++i) sys.offsets(i) = offs[i].get<double>();
    }
    if (j.contains("seed") && !j.at("seed").is_null()) {
      sys.seed = j.at("seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spin system JSON: ") + e.what());
  }
  sys.Validate();
  return sys;
}

SpinSystem SpinSystemFromSpec(const std::string& text,
                              std::optional<std::uint64_t> seed_override) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spin system JSON: ") + e.what());
  }
  if (j.contains("couplings")) {
    SpinSystem sys = SpinSystemFromJson(text);
    if (seed_override) sys.seed = seed_override;
    return sys;
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key != "n" && key != "coupling_bound_hz" && key != "seed") {
        throw ValidationError("spin system: unknown key '" + key + "'");
      }
    }
    const int n = j.at("n").get<int>();
    const double bound = j.at("coupling_bound_hz").get<double>();
    std::optional<std::uint64_t> seed = seed_override;
    if (!seed && j.contains("seed") && !j.at("seed").is_null()) {
      seed = j.at("seed").get<std::uint64_t>();
    }
    if (!seed) throw ValidationError("a seed is required for random couplings");
    return SpinSystem::Random(n, bound, *seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("spin system JSON: ") + e.what());
  }
}

}  // namespace spinphoto
