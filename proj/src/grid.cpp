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
#include "trifuse/grid.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "trifuse/errors.hpp"

namespace trifuse {

using json = nlohmann::json;

namespace {

json axis_overlay(const std::string& axis, const json& value) {
  if (axis == "variant") return {{"variant", value}};
  if (axis == "modalities") return {{"modalities", value}};
  if (axis == "seed") return {{"seed", value}};
  if (axis == "batch") return {{"batch", value}};
  if (axis == "mechanism" || axis == "stages" || axis == "tau" || axis == "se_ratio" || axis == "guidance" ||
      axis == "merge") {
    return {{"fusion", {{axis, value}}}};
  }
  throw ConfigError("sweep.axes." + axis, "unknown axis");
}

json gaff(const std::string& stages, int se, const std::string& guidance, const std::string& merge) {
  return {{"fusion",
           {{"mechanism", "gaff"}, {"stages", stages}, {"se_ratio", se}, {"guidance", guidance}, {"merge", merge}}}};
}

std::vector<json> preset_cells(const std::string& name) {
  std::vector<json> cells;
  if (name == "capacity") {
    for (const char* v : {"B0", "B1", "B2", "B3", "B4"}) cells.push_back({{"variant", v}});
  } else if (name == "gaff_placement") {
    for (const char* s : {"s1", "s2", "s3", "s4", "s23", "s34", "s234", "s1234"}) {
      cells.push_back(gaff(s, 4, "separate", "direct"));
    }
  } else if (name == "gaff_variants") {
    cells = {gaff("s4", 4, "separate", "bottleneck"), gaff("s4", 4, "shared", "direct"),
             gaff("s4", 4, "shared", "bottleneck"),   gaff("s4", 8, "separate", "direct"),
             gaff("s4", 8, "separate", "bottleneck"), gaff("s4", 8, "shared", "direct"),
             gaff("s4", 8, "shared", "bottleneck"),   gaff("s3", 4, "separate", "bottleneck"),
             gaff("s3", 4, "shared", "direct"),       gaff("s3", 4, "shared", "bottleneck"),
             gaff("s3", 8, "separate", "direct")};
  } else if (name == "cssa_tau") {
    for (const char* s : {"s1", "s2", "s3", "s4", "s23", "s34", "s1234"}) {
      for (double tau : {0.3, 0.5, 0.7}) {
        cells.push_back({{"fusion", {{"mechanism", "cssa"}, {"stages", s}, {"tau", tau}}}});
      }
    }
  } else if (name == "modalities") {
    for (const char* m : {"RTE", "RT", "TE", "RE"}) cells.push_back({{"modalities", m}});
  } else if (name == "components") {
    for (const char* m : {"bite_only", "mage_only", "mage_bite"}) cells.push_back({{"fusion", {{"mechanism", m}}}});
  } else if (name == "ablations") {
    for (const char* t : {"capacity", "gaff_placement", "gaff_variants", "cssa_tau", "modalities", "components"}) {
      auto sub = preset_cells(t);
      cells.insert(cells.end(), sub.begin(), sub.end());
    }
  } else {
    throw ConfigError("sweep.preset", "unknown preset \"" + name + "\"");
  }
  return cells;
}

}  // namespace

std::vector<std::string> preset_names() { return {"capacity", "gaff_placement", "gaff_variants", "cssa_tau", "modalities", "components", "ablations"}; }

SweepSpec SweepSpec::preset(const std::string& name) { return SweepSpec{preset_cells(name)}; }

SweepSpec SweepSpec::cartesian(const std::vector<std::pair<std::string, std::vector<json>>>& axes) {
  std::vector<json> cells{json::object()};
  for (const auto& [axis, values] : axes) {
    if (values.empty()) throw ConfigError("sweep.axes." + axis, "axis has no values");
    std::vector<json> next;
    for (const auto& cell : cells) {
      for (const auto& v : values) {
        json c = cell;
        c.merge_patch(axis_overlay(axis, v));
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }
  if (axes.empty()) cells.clear();
  return SweepSpec{std::move(cells)};
}

SweepSpec SweepSpec::parse(const json& doc) {
  if (!doc.is_object()) throw ConfigError("sweep", "expected an object");
  SweepSpec spec;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "preset" && it.key() != "runs" && it.key() != "axes") {
      throw ConfigError("sweep." + it.key(), "unknown key");
    }
  }
  if (doc.contains("preset")) {
    const auto& p = doc["preset"];
    std::vector<std::string> names;
    if (p.is_string()) {
      names.push_back(p.get<std::string>());
    } else if (p.is_array()) {
      for (const auto& n : p) {
        if (!n.is_string()) throw ConfigError("sweep.preset", "expected preset names");
        names.push_back(n.get<std::string>());
      }
    } else {
      throw ConfigError("sweep.preset", "expected a name or list of names");
    }
    for (const auto& n : names) {
      auto cells = preset_cells(n);
      spec.cells.insert(spec.cells.end(), cells.begin(), cells.end());
    }
  }
  if (doc.contains("runs")) {
    if (!doc["runs"].is_array()) throw ConfigError("sweep.runs", "expected a list of overlays");
    for (const auto& r : doc["runs"]) {
      if (!r.is_object()) throw ConfigError("sweep.runs", "each run must be an object");
      spec.cells.push_back(r);
    }
  }
  if (doc.contains("axes")) {
    if (!doc["axes"].is_object()) throw ConfigError("sweep.axes", "expected an object of axis lists");
    std::vector<std::pair<std::string, std::vector<json>>> axes;
    for (auto it = doc["axes"].begin(); it != doc["axes"].end(); ++it) {
      if (!it.value().is_array()) throw ConfigError("sweep.axes." + it.key(), "expected a list");
      axes.emplace_back(it.key(), std::vector<json>(it.value().begin(), it.value().end()));
    }
    auto cart = cartesian(axes);
    spec.cells.insert(spec.cells.end(), cart.cells.begin(), cart.cells.end());
  }
  return spec;
}

GridResult cmd_grid(const RunConfig& base, const SweepSpec& sweep, int workers, const CellRunner& runner) {
  std::vector<json> cells = sweep.cells;
  if (cells.empty()) cells.push_back(json::object());
  const CellRunner run = runner ? runner : [](const RunConfig& c) { return run_once(c); };

  std::vector<RunReport> reports(cells.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < cells.size(); i = next++) {
      RunReport& rep = reports[i];
      try {
        rep.config = apply_json(base, cells[i]);
        rep = run(rep.config);
      } catch (const std::exception& e) {
        rep.ok = false;
        rep.error = e.what();
      }
    }
  };
  const int n = std::clamp(workers, 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  GridResult result;
  result.reports = std::move(reports);
  std::stable_sort(result.reports.begin(), result.reports.end(),
                   [](const RunReport& a, const RunReport& b) { return a.key() < b.key(); });
  for (const auto& r : result.reports) result.failures += r.ok ? 0 : 1;
  return result;
}

void write_grid(const GridResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());
  std::ofstream csv(out_dir / "grid.csv");
  if (!csv) throw Error("cannot write " + (out_dir / "grid.csv").string());
  csv << csv_header();
  json doc = json::array();
  for (const auto& r : result.reports) {
    csv << csv_row(r);
    doc.push_back(r.to_json());
  }
  std::ofstream js(out_dir / "grid.json");
  if (!js) throw Error("cannot write " + (out_dir / "grid.json").string());
  js << json{{"runs", doc}, {"failures", result.failures}}.dump(2) << '\n';
}

}  // namespace trifuse
