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
#include <string>

#include "json.hpp"
#include "trifuse/manifest.hpp"
#include "trifuse/model.hpp"
#include "trifuse/preprocess.hpp"

namespace trifuse {

enum class DataSource { kSynthetic, kManifest };

std::string_view to_string(DataSource s);
DataSource parse_data_source(const std::string& s);

/// One fully specified run. Defaults are the main tri-modal setting:
/// B1, mage_bite at s1234, RTE, 301x391 frames, batch 1.
struct RunConfig {
  BackboneConfig backbone = BackboneConfig::preset(Variant::kB1);
  FusionConfig fusion;
  Modalities modalities;
  int64_t height = 301;
  int64_t width = 391;
  uint64_t seed = 0;
  int64_t batch = 1;
  DataSource source = DataSource::kSynthetic;
  std::string manifest;
  SplitSelector split = SplitSelector::kAll;
  PixelScale pixel_scale = PixelScale::kUnit;
  std::string out;
  int timing_reps = 5;
  int warmup = 1;
  bool with_neck = true;

  ModelConfig model() const;
  /// ConfigError naming the offending field. Cheap; runs before any compute.
  void validate() const;
  /// Stable identity of the model-relevant fields, used to order grid output.
  std::string key() const;

  nlohmann::json to_json() const;
};

/// Applies the keys present in `doc` on top of `base`. Unknown keys and
/// wrongly typed values raise ConfigError naming the field.
RunConfig apply_json(RunConfig base, const nlohmann::json& doc);

/// Reads a JSON config file; relative manifest paths resolve against the
/// config file's directory.
RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base = {});

}  // namespace trifuse
