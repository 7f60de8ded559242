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
#include "trifuse/manifest.hpp"

#include <fstream>
#include <iostream>
#include <json.hpp>

#include "trifuse/errors.hpp"

namespace trifuse {

namespace fs = std::filesystem;
using json = nlohmann::json;

size_t DatasetManifest::count(DayNight d) const {
  return static_cast<size_t>(std::count_if(entries.begin(), entries.end(),
                                           [d](const ManifestEntry& e) { return e.day_night == d; }));
}

SplitSelector parse_split_selector(const std::string& s) {
  if (s == "all") return SplitSelector::kAll;
  if (s == "day") return SplitSelector::kDay;
  if (s == "night") return SplitSelector::kNight;
  throw ConfigError("split", "expected all|day|night, got \"" + s + "\"");
}

std::string_view to_string(SplitSelector s) {
  switch (s) {
    case SplitSelector::kAll: return "all";
    case SplitSelector::kDay: return "day";
    case SplitSelector::kNight: return "night";
  }
  return "all";
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw FormatError(path.string() + ": manifest must be a JSON list");
  const fs::path base = path.parent_path();
  DatasetManifest m;
  for (size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    const std::string where = path.string() + "[" + std::to_string(i) + "]";
    if (!rec.is_object() || !rec.contains("image") || !rec.contains("labels") || !rec.contains("day_night")) {
      throw FormatError(where + ": record needs image, labels and day_night");
    }
    ManifestEntry e;
    e.image = base / rec["image"].get<std::string>();
    e.labels = base / rec["labels"].get<std::string>();
    e.day_night = parse_day_night(rec["day_night"].get<std::string>());
    if (rec.contains("split")) e.split = rec["split"].get<std::string>();
    if (!fs::exists(e.image)) throw ValidationError(where + ": missing image " + e.image.string());
    if (!fs::exists(e.labels)) throw ValidationError(where + ": missing labels " + e.labels.string());
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const fs::path& path, const DatasetManifest& m) {
  const fs::path base = path.parent_path();
  json doc = json::array();
  for (const auto& e : m.entries) {
    doc.push_back({{"image", e.image.lexically_relative(base).generic_string()},
                   {"labels", e.labels.lexically_relative(base).generic_string()},
                   {"day_night", std::string(to_string(e.day_night))},
                   {"split", e.split}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

DatasetManifest filter_split(const DatasetManifest& m, SplitSelector selector) {
  if (selector == SplitSelector::kAll) return m;
  const DayNight want = selector == SplitSelector::kDay ? DayNight::kDay : DayNight::kNight;
  DatasetManifest out;
  for (const auto& e : m.entries) {
    if (e.day_night == want) out.entries.push_back(e);
  }
  if (out.empty()) {
    std::cerr << "warning: split '" << to_string(selector) << "' selects no entries out of " << m.size()
              << '\n';
  }
  return out;
}

TriModalFrame load_entry(const DatasetManifest& m, size_t i) {
  const auto& e = m.entries.at(i);
  auto f = load_frame(e.image, e.labels);
  f.meta.day_night = e.day_night;
  return f;
}

}  // namespace trifuse
