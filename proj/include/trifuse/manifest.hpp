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
#include <vector>

#include "trifuse/frame.hpp"

namespace trifuse {

struct ManifestEntry {
  std::filesystem::path image;   // resolved .npy path
  std::filesystem::path labels;  // resolved YOLO label path
  DayNight day_night = DayNight::kDay;
  std::string split = "train";
};

/// Ordered list of samples. Iteration order is the file order, never
/// shuffled, so every statistic computed over it is deterministic.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  size_t count(DayNight d) const;
};

enum class SplitSelector { kAll, kDay, kNight };

SplitSelector parse_split_selector(const std::string& s);
std::string_view to_string(SplitSelector s);

/// Reads a JSON list of {image, labels, day_night[, split]} records.
/// Relative paths resolve against the manifest's directory; every
/// referenced file must exist.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes paths relative to the manifest's directory when possible.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);

/// Keeps entries whose illumination flag matches. An empty result prints a
/// warning but is not an error.
DatasetManifest filter_split(const DatasetManifest& m, SplitSelector selector);

/// Loads entry `i` with its day/night flag attached.
TriModalFrame load_entry(const DatasetManifest& m, size_t i);

}  // namespace trifuse
