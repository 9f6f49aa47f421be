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

#include <set>
#include <string>

#include "json.hpp"
#include "spinphoto/error.h"
#include "spinphoto/experiments.h"

namespace spinphoto {

namespace {

using Json = nlohmann::ordered_json;

Json Parse(const std::string& text, const char* what) {
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw ValidationError(std::string(what) + ": expected an object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

void RejectUnknown(const Json& j, const std::set<std::string>& known,
                   const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ValidationError(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void Read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json AcquisitionJson(const Acquisition& a) {
  Json j;
  j["t_acq_s"] = a.t_acq_s;
  j["dwell_s"] = a.dwell_s;
  j["lb_hz"] = a.lb_hz;
  j["zero_fill"] = a.zero_fill;
  j["dead_time_s"] = a.dead_time_s;
  return j;
}

Acquisition AcquisitionFrom(const Json& j, Acquisition a) {
  RejectUnknown(j, {"t_acq_s", "dwell_s", "lb_hz", "zero_fill", "dead_time_s"},
                "acquisition");
  Read(j, "t_acq_s", a.t_acq_s);
  Read(j, "dwell_s", a.dwell_s);
  Read(j, "lb_hz", a.lb_hz);
  Read(j, "zero_fill", a.zero_fill);
  Read(j, "dead_time_s", a.dead_time_s);
  return a;
}

}  // namespace

std::string AcquisitionToJson(const Acquisition& acq) {
  return AcquisitionJson(acq).dump(2) + "\n";
}

std::string PhotographyConfigToJson(const PhotographyConfig& cfg) {
  Json j;
  j["spacing_hz"] = cfg.spacing_hz;
  j["f_start_hz"] = cfg.f_start_hz ? Json(*cfg.f_start_hz) : Json(nullptr);
  j["amp1_hz"] = cfg.amp1_hz;
  j["dur1_s"] = cfg.dur1_s;
  j["steps1"] = cfg.steps1;
  j["amp2_hz"] = cfg.amp2_hz;
  j["dur2_s"] = cfg.dur2_s;
  j["steps2"] = cfg.steps2;
  j["phase_seed"] = cfg.phase_seed ? Json(*cfg.phase_seed) : Json(nullptr);
  j["phase_cycle_rad"] = cfg.phase_cycle;
  j["readout"] = std::string(ToString(cfg.readout));
  j["acquisition"] = AcquisitionJson(cfg.acquisition);
  return j.dump(2) + "\n";
}

PhotographyConfig PhotographyConfigFromJson(const std::string& text,
                                            const PhotographyConfig& base) {
  const Json j = Parse(text, "photography config");
  RejectUnknown(j,
                {"spacing_hz", "f_start_hz", "amp1_hz", "dur1_s", "steps1", "amp2_hz",
                 "dur2_s", "steps2", "phase_seed", "phase_cycle_rad", "readout",
                 "acquisition"},
                "photography config");
  PhotographyConfig cfg = base;
  try {
    Read(j, "spacing_hz", cfg.spacing_hz);
    if (j.contains("f_start_hz")) {
      const Json& f = j.at("f_start_hz");
      cfg.f_start_hz = f.is_null() ? std::nullopt : std::optional<double>(f.get<double>());
    }
    Read(j, "amp1_hz", cfg.amp1_hz);
    Read(j, "dur1_s", cfg.dur1_s);
    Read(j, "steps1", cfg.steps1);
    Read(j, "amp2_hz", cfg.amp2_hz);
    Read(j, "dur2_s", cfg.dur2_s);
    Read(j, "steps2", cfg.steps2);
    if (j.contains("phase_seed")) {
      const Json& s = j.at("phase_seed");
      cfg.phase_seed = s.is_null() ? std::nullopt
                                   : std::optional<std::uint64_t>(s.get<std::uint64_t>());
    }
    Read(j, "phase_cycle_rad", cfg.phase_cycle);
    if (j.contains("readout")) cfg.readout = ParseReadout(j.at("readout").get<std::string>());
    if (j.contains("acquisition")) {
      cfg.acquisition = AcquisitionFrom(j.at("acquisition"), cfg.acquisition);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("photography config: ") + e.what());
  }
  return cfg;
}

std::string Fig2bConfigToJson(const Fig2bConfig& cfg) {
  Json j;
  j["n_spins"] = cfg.n_spins;
  j["coupling_bound_hz"] = cfg.coupling_bound_hz;
  j["seed"] = cfg.seed;
  j["amp1_hz"] = cfg.amp1_hz;
  j["dur1_s"] = cfg.dur1_s;
  j["freq1_hz"] = cfg.freq1_hz;
  j["amp2_hz"] = cfg.amp2_hz;
  j["dur2_max_s"] = cfg.dur2_max_s;
  j["dur2_step_s"] = cfg.dur2_step_s;
  j["dt_s"] = cfg.dt_s;
  j["phase_cycle_rad"] = cfg.phase_cycle;
  j["acquisition"] = AcquisitionJson(cfg.acquisition);
  return j.dump(2) + "\n";
}

Fig2bConfig Fig2bConfigFromJson(const std::string& text, const Fig2bConfig& base) {
  const Json j = Parse(text, "fig2b config");
  RejectUnknown(j,
                {"n_spins", "coupling_bound_hz", "seed", "amp1_hz", "dur1_s", "freq1_hz",
                 "amp2_hz", "dur2_max_s", "dur2_step_s", "dt_s", "phase_cycle_rad",
                 "acquisition"},
                "fig2b config");
  Fig2bConfig cfg = base;
  try {
    Read(j, "n_spins", cfg.n_spins);
    Read(j, "coupling_bound_hz", cfg.coupling_bound_hz);
    Read(j, "seed", cfg.seed);
    Read(j, "amp1_hz", cfg.amp1_hz);
    Read(j, "dur1_s", cfg.dur1_s);
    Read(j, "freq1_hz", cfg.freq1_hz);
    Read(j, "amp2_hz", cfg.amp2_hz);
    Read(j, "dur2_max_s", cfg.dur2_max_s);
    Read(j, "dur2_step_s", cfg.dur2_step_s);
    Read(j, "dt_s", cfg.dt_s);
    Read(j, "phase_cycle_rad", cfg.phase_cycle);
    if (j.contains("acquisition")) {
      cfg.acquisition = AcquisitionFrom(j.at("acquisition"), cfg.acquisition);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("fig2b config: ") + e.what());
  }
  return cfg;
}

std::string StackIndexJson(const SpectrumStack& stack,
                           const std::vector<std::string>& files) {
  if (files.size() != stack.rows.size()) {
    throw ValidationError("one file name per stack row is required");
  }
  Json j;
  j["format"] = "spinphoto-stack/1";
  Json rows = Json::array();
  for (std::size_t r = 0; r < files.size(); ++r) {
    Json row;
    row["row"] = r;
    row["reference_hz"] = stack.row_freqs[r];
    row["file"] = files[r];
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

PhotographyPreset GetPhotographyPreset(std::string_view name) {
  PhotographyPreset p;
  p.name = std::string(name);
  if (name == "paper-echo") {
    // 1024 bits, 20 Hz apart, read out by 32-tooth combs 640 Hz apart.
    p.rows = p.cols = 32;
    p.config.spacing_hz = 20.0;
    p.config.amp1_hz = 1.2;
    p.config.dur1_s = 1.0;
    p.config.steps1 = 51200;
    p.config.amp2_hz = 9.0;
    p.config.dur2_s = 0.05;
    p.config.steps2 = 10240;
    return p;
  }
  if (name == "desk-4x4") {
    p.rows = p.cols = 4;
    p.n_spins = 8;
    p.coupling_bound_hz = 792.0;
    p.seed = 1;
    p.config.spacing_hz = 40.0;
    p.config.amp1_hz = 2.4;
    p.config.dur1_s = 0.5;
    p.config.amp2_hz = 6.0;
    p.config.dur2_s = 0.025;
    p.config.readout = Readout::kDifference;
    return p;
  }
  throw ValidationError("unknown photography preset '" + std::string(name) + "'");
}

}  // namespace spinphoto
