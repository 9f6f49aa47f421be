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

#include "commands.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "spinphoto/codec.h"
#include "spinphoto/error.h"
#include "spinphoto/experiments.h"
#include "spinphoto/signal.h"
#include "spinphoto/spin_system.h"
#include "spinphoto/waveform.h"

namespace spinphoto::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string Format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Indexed(const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%02d.%s", stem, i, ext);
  return buf;
}

// Collects every artifact in memory so that nothing is written when any step
// fails, then writes them together with the manifest.
class Outputs {
 public:
  void Add(std::string name, std::string text) {
    files_.emplace_back(std::move(name), std::move(text));
  }

  void Write(const std::string& dir, const std::string& command,
             const Json& config, const std::optional<std::uint64_t>& seed,
             PropagationMode mode) {
    Json m;
    m["format"] = "spinphoto-manifest/1";
    m["tool"] = "spinphoto";
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["config"] = config;
    m["config_hash"] = "fnv1a64:" + Fnv1a64(config.dump());
    m["seed"] = seed ? Json(*seed) : Json(nullptr);
    m["mode"] = std::string(ToString(mode));
    m["formats"] = {
        {"waveform", "spinphoto-waveform/1"}, {"spectrum", "spinphoto-spectrum/1"},
        {"stack", "spinphoto-stack/1"},       {"decode", "spinphoto-decode/1"},
        {"image", "pbm-p1"},                  {"summary", "csv:duration_s,signed_amplitude"},
    };
    Json names = Json::array();
    for (const auto& [name, text] : files_) names.push_back(name);
    m["files"] = std::move(names);
    Add("manifest.json", m.dump(2) + "\n");

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + dir + "'");
    for (const auto& [name, text] : files_) {
      const fs::path path = fs::path(dir) / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out || !(out << text) || !out.flush()) {
        throw ValidationError("cannot write '" + path.string() + "'");
      }
    }
    spdlog::info("wrote {} files to {}", files_.size(), dir);
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

Json LoadUserConfig(const RunOptions& opts) {
  if (!opts.config_path) return Json::object();
  try {
    Json j = Json::parse(ReadFile(*opts.config_path));
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + *opts.config_path + "': " + e.what());
  }
}

void RejectUnknown(const Json& j, const std::set<std::string>& known) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
}

BitImage LoadImage(const std::string& path) {
  BitImage img = ParsePbm(ReadFile(path));
  img.Validate();
  return img;
}

// Resolved photography document: preset defaults, then the config file, then
// the command-line seed.
struct PhotoDoc {
  std::optional<std::string> preset;
  int rows = 0, cols = 0;  // from the preset, 0 when free
  Json spin_system;        // null when absent
  PhotographyConfig cfg;
  Json decode = {{"threshold", "otsu"}};

  Json ToJson() const {
    Json j;
    j["preset"] = preset ? Json(*preset) : Json(nullptr);
    j["spin_system"] = spin_system;
    j["photography"] = Json::parse(PhotographyConfigToJson(cfg));
    j["decode"] = decode;
    return j;
  }

  ThresholdMode Threshold() const {
    const Json& t = decode.at("threshold");
    if (t.is_string() && t.get<std::string>() == "otsu") return ThresholdMode::Otsu();
    if (t.is_number()) return ThresholdMode::Fixed(t.get<double>());
    throw ValidationError("decode.threshold must be \"otsu\" or a number");
  }
};

PhotoDoc ResolvePhotoDoc(const RunOptions& opts) {
  PhotoDoc d;
  if (opts.preset) {
    const PhotographyPreset p = GetPhotographyPreset(*opts.preset);
    d.preset = p.name;
    d.rows = p.rows;
    d.cols = p.cols;
    d.cfg = p.config;
    if (p.n_spins > 0) {
      d.spin_system = {{"n", p.n_spins},
                       {"coupling_bound_hz", p.coupling_bound_hz},
                       {"seed", p.seed}};
    }
  }
  const Json user = LoadUserConfig(opts);
  RejectUnknown(user, {"spin_system", "photography", "decode"});
  if (user.contains("photography")) {
    d.cfg = PhotographyConfigFromJson(user.at("photography").dump(), d.cfg);
  }
  if (user.contains("spin_system")) d.spin_system = user.at("spin_system");
  if (user.contains("decode")) {
    RejectUnknown(user.at("decode"), {"threshold"});
    d.decode = user.at("decode");
  }
  if (opts.seed && d.spin_system.is_object() && !d.spin_system.contains("couplings")) {
    d.spin_system["seed"] = *opts.seed;
  }
  d.Threshold();
  return d;
}

void CheckImageMatchesPreset(const PhotoDoc& d, const BitImage& img) {
  if (d.rows > 0 && (img.rows != d.rows || img.cols != d.cols)) {
    throw ValidationError("preset " + *d.preset + " expects a " +
                          std::to_string(d.rows) + "x" + std::to_string(d.cols) +
                          " image, got " + std::to_string(img.rows) + "x" +
                          std::to_string(img.cols));
  }
}

std::optional<std::uint64_t> SeedOf(const SpinSystem& sys) { return sys.seed; }

}  // namespace

std::string Fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int cmd_synth(const std::string& image_path, const RunOptions& opts) {
  const BitImage img = LoadImage(image_path);
  const PhotoDoc doc = ResolvePhotoDoc(opts);
  CheckImageMatchesPreset(doc, img);
  doc.cfg.Validate(img);
  if (img.Ones() == 0) spdlog::warn("image has no set bits; the waveform is all zero");

  Waveform pulse1;
  std::optional<std::uint64_t> seed;
  if (doc.spin_system.is_object()) {
    const SpinSystem sys = SpinSystemFromSpec(doc.spin_system.dump(), opts.seed);
    seed = SeedOf(sys);
    pulse1 = PhotographyPulse1(img, doc.cfg, StaticEigensystem(sys));
  } else {
    if (doc.cfg.steps1 <= 0) {
      throw ValidationError("steps1 is required when no spin system is given");
    }
    const HarmonicSet hs = bits_to_harmonics(img, doc.cfg.StartFor(img.size()),
                                             doc.cfg.spacing_hz, doc.cfg.amp1_hz);
    pulse1 = synthesize(doc.cfg.phase_seed ? RandomizePhases(hs, *doc.cfg.phase_seed) : hs,
                        doc.cfg.dur1_s, doc.cfg.steps1);
  }
  spdlog::info("pulse 1: {} harmonics, {} steps over {} s", img.size(), pulse1.n_steps(),
               pulse1.duration_s);

  Outputs out;
  out.Add("pulse1.csv", WaveformToCsv(pulse1));
  out.Add("pulse1.json", WaveformSidecarJson(pulse1));
  out.Write(opts.out_dir, "synth", doc.ToJson(), seed, opts.mode);
  return kOk;
}

int cmd_fig2b(const RunOptions& opts) {
  if (opts.preset && *opts.preset != "fig2b") {
    throw ValidationError("fig2b accepts only the 'fig2b' preset");
  }
  Fig2bConfig cfg;
  if (opts.config_path) cfg = Fig2bConfigFromJson(ReadFile(*opts.config_path), cfg);
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.Validate();

  spdlog::info("fig2b sweep: seed {}, {} durations, mode {}", cfg.seed,
               cfg.Durations().size(), ToString(opts.mode));
  const std::vector<SweepPoint> points = run_fig2b(cfg, opts.mode, opts.jobs);

  Outputs out;
  out.Add("spin_system.json",
          SpinSystemToJson(SpinSystem::Random(cfg.n_spins, cfg.coupling_bound_hz, cfg.seed)));
  std::string summary = "duration_s,signed_amplitude\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    summary += Format17(points[k].duration_s) + "," +
               Format17(points[k].signed_amplitude) + "\n";
    out.Add(Indexed("spectrum", static_cast<int>(k), "csv"),
            SpectrumToCsv(points[k].spectrum));
    out.Add(Indexed("spectrum", static_cast<int>(k), "json"),
            SpectrumSidecarJson(points[k].spectrum));
  }
  out.Add("summary.csv", summary);
  out.Write(opts.out_dir, "fig2b", Json::parse(Fig2bConfigToJson(cfg)), cfg.seed,
            opts.mode);
  return kOk;
}

int cmd_photograph(const std::string& image_path, const RunOptions& opts,
                   bool self_check) {
  const BitImage img = LoadImage(image_path);
  const PhotoDoc doc = ResolvePhotoDoc(opts);
  CheckImageMatchesPreset(doc, img);
  if (!doc.spin_system.is_object()) {
    throw ValidationError(doc.preset ? "preset " + *doc.preset + " is synthesis only"
                                     : std::string("photograph needs a spin_system"));
  }
  doc.cfg.Validate(img);
  const SpinSystem sys = SpinSystemFromSpec(doc.spin_system.dump(), opts.seed);
  const StaticEigensystem h0(sys);
  const Waveform pulse1 = PhotographyPulse1(img, doc.cfg, h0);

  spdlog::info("photograph: {}x{} image, {} spins, readout {}, mode {}, jobs {}",
               img.rows, img.cols, sys.n, ToString(doc.cfg.readout),
               ToString(opts.mode), opts.jobs);
  const SpectrumStack stack =
      run_photography(img, sys, doc.cfg, {.mode = opts.mode, .jobs = opts.jobs});
  const Eigen::MatrixXd table = sample_slots(stack, doc.cfg.StartFor(img.size()),
                                            doc.cfg.spacing_hz, img.rows, img.cols);
  DecodeReport report = decode(table, doc.Threshold());
  const Fidelity fid = fidelity(report.recovered, img);
  report.bit_errors = fid.bit_errors;
  spdlog::info("decoded: {} bit errors, margin {:.3f}", fid.bit_errors, report.margin);

  Outputs out;
  out.Add("spin_system.json", SpinSystemToJson(sys));
  out.Add("pulse1.csv", WaveformToCsv(pulse1));
  out.Add("pulse1.json", WaveformSidecarJson(pulse1));
  std::vector<std::string> names;
  for (int r = 0; r < stack.size(); ++r) {
    names.push_back(Indexed("row", r, "csv"));
    out.Add(names.back(), SpectrumToCsv(stack.rows[r]));
    out.Add(Indexed("row", r, "json"), SpectrumSidecarJson(stack.rows[r]));
  }
  out.Add("stack.json", StackIndexJson(stack, names));
  out.Add("decode.json", DecodeReportToJson(report));
  out.Add("recovered.pbm", FormatPbm(report.recovered));
  out.Write(opts.out_dir, "photograph", doc.ToJson(), SeedOf(sys), opts.mode);

  if (self_check && fid.bit_errors > 0) {
    spdlog::error("self-check failed: {} of {} bits differ from the input",
                  fid.bit_errors, img.size());
    return kSelfCheckFailed;
  }
  return kOk;
}

}  // namespace spinphoto::cli
