// Copyright 2026 The TriFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trifuse/errors.hpp"
#include "trifuse/events.hpp"
#include "trifuse/grid.hpp"
#include "trifuse/metrics.hpp"
#include "trifuse/npy.hpp"
#include "trifuse/report.hpp"
#include "trifuse/run_config.hpp"
#include "trifuse/synth.hpp"
#include "trifuse/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace trifuse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitPropertyFailure = 2;
constexpr int kExitPartialGrid = 3;

struct Globals {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  int workers = 1;
};

// Model/run flags shared by inspect and grid; set ones override the file.
struct RunFlags {
  std::optional<std::string> variant, mechanism, stages, guidance, merge, modalities, source, manifest, split, scale;
  std::optional<double> tau;
  std::optional<int> se_ratio, timing_reps, warmup;
  std::optional<int64_t> height, width, batch;

  void attach(CLI::App* app) {
    app->add_option("--variant", variant, "B0..B4");
    app->add_option("--mechanism", mechanism, "mage_bite|mage_only|bite_only|cssa|gaff|none");
    app->add_option("--stages", stages, "fusion placement, e.g. s1234, s34, none");
    app->add_option("--tau", tau, "CSSA switching threshold");
    app->add_option("--se-ratio", se_ratio, "GAFF SE reduction ratio (4 or 8)");
    app->add_option("--guidance", guidance, "GAFF guidance: shared|separate");
    app->add_option("--merge", merge, "GAFF merge: direct|bottleneck");
    app->add_option("--modalities", modalities, "RTE, RT, TE or RE");
    app->add_option("--height", height, "input height before padding");
    app->add_option("--width", width, "input width before padding");
    app->add_option("--batch", batch, "batch size");
    app->add_option("--source", source, "synthetic|manifest");
    app->add_option("--manifest", manifest, "dataset manifest path");
    app->add_option("--split", split, "all|day|night");
    app->add_option("--pixel-scale", scale, "unit|byte");
    app->add_option("--timing-reps", timing_reps, "timed forwards (median reported)");
    app->add_option("--warmup", warmup, "untimed forwards before timing");
  }

  json overlay() const {
    json j = json::object();
    if (variant) j["variant"] = *variant;
    if (mechanism) j["fusion"]["mechanism"] = *mechanism;
    if (stages) j["fusion"]["stages"] = *stages;
    if (tau) j["fusion"]["tau"] = *tau;
    if (se_ratio) j["fusion"]["se_ratio"] = *se_ratio;
    if (guidance) j["fusion"]["guidance"] = *guidance;
    if (merge) j["fusion"]["merge"] = *merge;
    if (modalities) j["modalities"] = *modalities;
    if (height) j["input"]["height"] = *height;
    if (width) j["input"]["width"] = *width;
    if (batch) j["batch"] = *batch;
    if (source) j["data"]["source"] = *source;
    if (manifest) j["data"]["manifest"] = *manifest;
    if (split) j["data"]["split"] = *split;
    if (scale) j["data"]["pixel_scale"] = *scale;
    if (timing_reps) j["timing_reps"] = *timing_reps;
    if (warmup) j["warmup"] = *warmup;
    return j;
  }
};

RunConfig resolve_config(const Globals& g, const RunFlags& flags) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  c = apply_json(c, flags.overlay());
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = g.out;
  c.validate();
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ConfigError(field, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(field, path + ": " + e.what());
  }
}

int run_inspect(const Globals& g, const RunFlags& flags) {
  const RunConfig c = resolve_config(g, flags);
  const RunReport rep = run_once(c);
  const std::string text = rep.to_json().dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text(c.out, text);
    std::cerr << "wrote " << c.out << '\n';
  }
  return kExitOk;
}

int run_grid(const Globals& g, const RunFlags& flags, const std::string& sweep_path,
             const std::vector<std::string>& presets) {
  RunConfig base = resolve_config(g, flags);
  SweepSpec sweep;
  if (!sweep_path.empty()) sweep = SweepSpec::parse(read_json_file(sweep_path, "sweep"));
  for (const auto& p : presets) {
    auto extra = SweepSpec::preset(p);
    sweep.cells.insert(sweep.cells.end(), extra.cells.begin(), extra.cells.end());
  }
  const fs::path out_dir = base.out.empty() ? fs::path("grid_out") : fs::path(base.out);
  base.out.clear();
  const GridResult result = cmd_grid(base, sweep, g.workers);
  write_grid(result, out_dir);
  std::cout << result.reports.size() << " runs, " << result.failures << " failed; wrote "
            << (out_dir / "grid.csv").string() << " and " << (out_dir / "grid.json").string() << '\n';
  for (const auto& r : result.reports) {
    if (!r.ok) std::cerr << "failed: " << r.key() << ": " << r.error << '\n';
  }
  return result.failures == 0 ? kExitOk : kExitPartialGrid;
}

int run_verify(const Globals& g, int seeds, const std::string& fault, const std::string& filter) {
  FaultInjection faults;
  if (fault == "gate-clamp") {
    faults.ignore_gate_override = true;
  } else if (!fault.empty()) {
    throw ConfigError("fault", "unknown fault \"" + fault + "\" (known: gate-clamp)");
  }
  if (seeds < 1) throw ConfigError("seeds", "must be >= 1");
  const VerifySummary s = cmd_verify(seeds, g.seed.value_or(0), faults, filter);
  std::cout << s.str();
  std::cout << (s.ok() ? "all properties passed\n" : "property failures detected\n");
  return s.ok() ? kExitOk : kExitPropertyFailure;
}

int run_synth(const Globals& g, SynthSpec spec) {
  spec.seed = g.seed.value_or(0);
  const fs::path out = g.out.empty() ? fs::path("synth_out") : fs::path(g.out);
  const auto res = cmd_synth(spec, out);
  std::cout << "wrote " << spec.frames << " frames; manifest " << res.manifest.string() << '\n';
  return kExitOk;
}

int run_eval(const Globals& g, const std::string& dets_path, const std::string& gts_path) {
  const auto dets = read_detections(dets_path);
  const auto gts = read_ground_truth(gts_path);
  const EvalReport rep = evaluate(dets, gts);
  if (rep.flagged) std::cerr << "warning: ground truth is empty; AP reported as 0\n";
  const std::string text = to_json(rep).dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_text(g.out, text);
  }
  return kExitOk;
}

int run_bin_events(const Globals& g, const std::string& events_path, const std::string& stamps_path,
                   int64_t height, int64_t width, double dt) {
  if (height < 1 || width < 1) throw ConfigError("height/width", "sensor geometry must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt", "window must be positive");
  const EventStream stream = read_event_file(events_path, height, width);
  const auto stamps = read_timestamps(stamps_path);
  std::vector<float> frames;
  frames.reserve(stamps.size() * static_cast<size_t>(height * width));
  for (double t : stamps) {
    const Matrix m = bin_events(stream, t, dt);
    frames.insert(frames.end(), m.values().begin(), m.values().end());
  }
  const fs::path out = g.out.empty() ? fs::path("events.npy") : fs::path(g.out);
  npy::write(out, npy::from_float({static_cast<int64_t>(stamps.size()), height, width}, frames));
  std::cout << "wrote " << stamps.size() << " frames to " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trifuse: tri-modal dual-stream fusion backbone toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed (overrides the config file)");
  app.add_option("--out", g.out, "output path");
  app.add_option("--workers", g.workers, "parallel grid cells")->check(CLI::PositiveNumber);

  RunFlags inspect_flags, grid_flags;
  auto* inspect = app.add_subcommand("inspect", "build a model, report shapes, parameter count and timing");
  inspect_flags.attach(inspect);

  auto* grid = app.add_subcommand("grid", "run an ablation sweep");
  grid_flags.attach(grid);
  std::string sweep_path;
  std::vector<std::string> presets;
  grid->add_option("--sweep", sweep_path, "JSON sweep spec")->check(CLI::ExistingFile);
  grid->add_option("--preset", presets, "capacity, gaff_placement, gaff_variants, cssa_tau, modalities, components or ablations");

  auto* verify = app.add_subcommand("verify", "run every property suite over seeded inputs");
  int seeds = 20;
  std::string fault, filter;
  verify->add_option("--seeds", seeds, "number of seeds per property");
  verify->add_option("--fault", fault, "inject a fault: gate-clamp");
  verify->add_option("--filter", filter, "only properties whose name contains this");

  auto* synth = app.add_subcommand("synth", "write a synthetic tri-modal corpus");
  SynthSpec spec;
  synth->add_option("--frames", spec.frames, "number of frames");
  synth->add_option("--height", spec.height, "frame height");
  synth->add_option("--width", spec.width, "frame width");
  synth->add_option("--min-boxes", spec.min_boxes, "minimum boxes per frame");
  synth->add_option("--max-boxes", spec.max_boxes, "maximum boxes per frame");
  synth->add_option("--min-size", spec.min_size, "minimum box side (px)");
  synth->add_option("--max-size", spec.max_size, "maximum box side (px)");
  synth->add_option("--night-fraction", spec.night_fraction, "fraction of night frames");

  auto* eval = app.add_subcommand("eval", "mAP / mAP50 of JSONL detections against JSONL ground truth");
  std::string dets_path, gts_path;
  eval->add_option("--detections", dets_path, "detections JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--gts", gts_path, "ground-truth JSONL")->required()->check(CLI::ExistingFile);

  auto* bin = app.add_subcommand("bin-events", "bin an event file into (T, H, W) frames");
  std::string events_path, stamps_path;
  int64_t height = 0, width = 0;
  double dt = kDefaultEventWindow;
  bin->add_option("--events", events_path, "event text file")->required()->check(CLI::ExistingFile);
  bin->add_option("--timestamps", stamps_path, "frame timestamps (s)")->required()->check(CLI::ExistingFile);
  bin->add_option("--height", height, "sensor height")->required();
  bin->add_option("--width", width, "sensor width")->required();
  bin->add_option("--dt", dt, "window length in seconds (default 1/30)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*inspect) return run_inspect(g, inspect_flags);
    if (*grid) return run_grid(g, grid_flags, sweep_path, presets);
    if (*verify) return run_verify(g, seeds, fault, filter);
    if (*synth) return run_synth(g, spec);
    if (*eval) return run_eval(g, dets_path, gts_path);
    if (*bin) return run_bin_events(g, events_path, stamps_path, height, width, dt);
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.field() << "]: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
