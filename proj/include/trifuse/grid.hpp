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
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trifuse/report.hpp"

namespace trifuse {

/// A sweep is an ordered list of config overlays (JSON fragments in the
/// run-config schema), each applied on top of the base config.
///
/// Accepted JSON forms:
///   {"axes": {"stages": ["s1", "s2"], "tau": [0.3, 0.5]}}   cartesian product
///   {"runs": [{"fusion": {"mechanism": "cssa"}}, ...]}       listed cells
///   {"preset": "cssa_tau"} or {"preset": ["capacity", "gaff_placement"]}
/// Forms may be combined; cells are concatenated in the order preset, runs, axes.
struct SweepSpec {
  std::vector<nlohmann::json> cells;

  static SweepSpec parse(const nlohmann::json& doc);
  static SweepSpec preset(const std::string& name);
  /// Axis names: variant, mechanism, stages, tau, se_ratio, guidance, merge,
  /// modalities, seed, batch.
  static SweepSpec cartesian(const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& axes);
};

std::vector<std::string> preset_names();

struct GridResult {
  std::vector<RunReport> reports;  // sorted by config key
  size_t failures = 0;
};

using CellRunner = std::function<RunReport(const RunConfig&)>;

/// Runs every cell in isolation on up to `workers` threads. A failing cell
/// is recorded (ok = false) and the rest proceed. An empty sweep runs the
/// base config once.
GridResult cmd_grid(const RunConfig& base, const SweepSpec& sweep, int workers = 1,
                    const CellRunner& runner = nullptr);

/// Writes grid.csv and grid.json into `out_dir`.
void write_grid(const GridResult& result, const std::filesystem::path& out_dir);

}  // namespace trifuse
