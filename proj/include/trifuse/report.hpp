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

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trifuse/metrics.hpp"
#include "trifuse/run_config.hpp"

namespace trifuse {

struct RunReport {
  RunConfig config;
  bool ok = false;
  std::string error;

  Shape4 input_shape;
  std::array<Shape4, 4> stage_shapes{};
  std::array<Shape4, 5> pyramid_shapes{};
  ParamCount params;
  std::vector<double> forward_ms;
  double median_ms = 0.0;
  std::vector<FusionDiagnostics> diagnostics;
  std::optional<EvalReport> eval;

  std::string key() const { return config.key(); }
  /// Hex digest of the stage and pyramid shapes.
  std::string shapes_hash() const;
  nlohmann::json to_json() const;
};

nlohmann::json to_json(const EvalReport& r);

/// The padded, normalized (B, 5, H, W) input a run feeds to the model:
/// seeded uniform pixels for synthetic runs, the first `batch` frames of
/// the selected split otherwise.
Tensor4 build_input(const RunConfig& config);

/// Validates, builds the model, and times `timing_reps` forwards after
/// `warmup` untimed ones. Errors propagate.
RunReport run_once(const RunConfig& config, const FusionOptions& options = {});

std::string csv_header();
std::string csv_row(const RunReport& r);

double median(std::vector<double> v);

}  // namespace trifuse
