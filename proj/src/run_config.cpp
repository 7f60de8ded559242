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
#include "trifuse/run_config.hpp"

#include <fstream>
#include <sstream>

#include "trifuse/errors.hpp"

namespace trifuse {

using json = nlohmann::json;

std::string_view to_string(DataSource s) { return s == DataSource::kSynthetic ? "synthetic" : "manifest"; }

DataSource parse_data_source(const std::string& s) {
  if (s == "synthetic") return DataSource::kSynthetic;
  if (s == "manifest") return DataSource::kManifest;
  throw ConfigError("data.source", "expected synthetic|manifest, got \"" + s + "\"");
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.backbone = backbone;
  m.fusion = fusion;
  m.modalities = modalities;
  m.with_neck = with_neck;
  return m;
}

void RunConfig::validate() const {
  model().validate();
  if (height < 1) throw ConfigError("input.height", "must be positive");
  if (width < 1) throw ConfigError("input.width", "must be positive");
  if (batch < 1) throw ConfigError("batch", "must be positive");
  if (timing_reps < 1) throw ConfigError("timing_reps", "must be >= 1");
  if (warmup < 0) throw ConfigError("warmup", "must be >= 0");
  if (source == DataSource::kManifest && manifest.empty()) {
    throw ConfigError("data.manifest", "a manifest path is required when data.source is manifest");
  }
}

std::string RunConfig::key() const {
  std::ostringstream os;
  os << to_string(backbone.variant);
  if (backbone.variant == Variant::kCustom) {
    for (auto w : backbone.widths) os << '-' << w;
    for (auto d : backbone.depths) os << '.' << d;
  }
  os << '|' << to_string(fusion.mechanism) << '|' << fusion.stages.str();
  if (fusion.mechanism == Mechanism::kCssa) os << "|tau=" << fusion.tau;
  if (fusion.mechanism == Mechanism::kGaff) {
    os << "|se=" << fusion.se_ratio << '|' << to_string(fusion.guidance) << '|' << to_string(fusion.merge);
  }
  os << '|' << modalities.str() << '|' << height << 'x' << width << "|b" << batch << "|seed" << seed;
  return os.str();
}

namespace {

json arr4(const std::array<int64_t, 4>& a) { return json::array({a[0], a[1], a[2], a[3]}); }

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["variant"] = std::string(to_string(backbone.variant));
  j["backbone"] = {{"widths", arr4(backbone.widths)},       {"depths", arr4(backbone.depths)},
                   {"heads", arr4(backbone.heads)},         {"sr_ratios", arr4(backbone.sr_ratios)},
                   {"ffn_expansion", backbone.ffn_expansion}};
  j["fusion"] = {{"mechanism", std::string(to_string(fusion.mechanism))},
                 {"stages", fusion.stages.str()},
                 {"tau", fusion.tau},
                 {"se_ratio", fusion.se_ratio},
                 {"guidance", std::string(to_string(fusion.guidance))},
                 {"merge", std::string(to_string(fusion.merge))}};
  j["modalities"] = modalities.str();
  j["input"] = {{"height", height}, {"width", width}};
  j["seed"] = seed;
  j["batch"] = batch;
  j["data"] = {{"source", std::string(to_string(source))},
               {"manifest", manifest},
               {"split", std::string(to_string(split))},
               {"pixel_scale", std::string(to_string(pixel_scale))}};
  j["out"] = out;
  j["timing_reps"] = timing_reps;
  j["warmup"] = warmup;
  j["with_neck"] = with_neck;
  return j;
}

namespace {

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
}

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(field, "expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(field, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (j.is_number_unsigned() == false && j.get<int64_t>() < 0) throw ConfigError(field, "must be >= 0");
      }
    } else {
      if (!j.is_number()) throw ConfigError(field, "expected a number");
    }
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

std::array<int64_t, 4> get_arr4(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(field, "expected a list of four integers");
  std::array<int64_t, 4> out{};
  for (size_t i = 0; i < 4; ++i) out[i] = get_as<int64_t>(j[i], field);
  return out;
}

template <typename Fn>
void for_keys(const json& obj, const std::string& scope, Fn&& fn) {
  require_object(obj, scope.empty() ? "config" : scope);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string field = scope.empty() ? it.key() : scope + "." + it.key();
    if (!fn(it.key(), it.value(), field)) throw ConfigError(field, "unknown key");
  }
}

}  // namespace

RunConfig apply_json(RunConfig c, const json& doc) {
  // The variant goes first so explicit backbone fields can refine a preset.
  if (doc.is_object() && doc.contains("variant")) {
    const auto v = parse_variant(get_as<std::string>(doc["variant"], "variant"));
    if (v != Variant::kCustom) c.backbone = BackboneConfig::preset(v);
    c.backbone.variant = v;
  }
  for_keys(doc, "", [&](const std::string& k, const json& v, const std::string& field) {
    if (k == "variant") return true;
    if (k == "backbone") {
      for_keys(v, field, [&](const std::string& bk, const json& bv, const std::string& bf) {
        if (bk == "widths") c.backbone.widths = get_arr4(bv, bf);
        else if (bk == "depths") c.backbone.depths = get_arr4(bv, bf);
        else if (bk == "heads") c.backbone.heads = get_arr4(bv, bf);
        else if (bk == "sr_ratios") c.backbone.sr_ratios = get_arr4(bv, bf);
        else if (bk == "ffn_expansion") c.backbone.ffn_expansion = get_as<int64_t>(bv, bf);
        else return false;
        return true;
      });
      const auto preset = c.backbone.variant == Variant::kCustom ? c.backbone : BackboneConfig::preset(c.backbone.variant);
      if (c.backbone.widths != preset.widths || c.backbone.depths != preset.depths ||
          c.backbone.heads != preset.heads || c.backbone.sr_ratios != preset.sr_ratios ||
          c.backbone.ffn_expansion != preset.ffn_expansion) {
        c.backbone.variant = Variant::kCustom;
      }
      return true;
    }
    if (k == "fusion") {
      for_keys(v, field, [&](const std::string& fk, const json& fv, const std::string& ff) {
        if (fk == "mechanism") c.fusion.mechanism = parse_mechanism(get_as<std::string>(fv, ff));
        else if (fk == "stages") c.fusion.stages = StageSet::parse(get_as<std::string>(fv, ff));
        else if (fk == "tau") c.fusion.tau = get_as<double>(fv, ff);
        else if (fk == "se_ratio") c.fusion.se_ratio = get_as<int>(fv, ff);
        else if (fk == "guidance") c.fusion.guidance = parse_guidance(get_as<std::string>(fv, ff));
        else if (fk == "merge") c.fusion.merge = parse_merge(get_as<std::string>(fv, ff));
        else return false;
        return true;
      });
      return true;
    }
    if (k == "modalities") {
      c.modalities = Modalities::parse(get_as<std::string>(v, field));
    } else if (k == "input") {
      for_keys(v, field, [&](const std::string& ik, const json& iv, const std::string& inf) {
        if (ik == "height") c.height = get_as<int64_t>(iv, inf);
        else if (ik == "width") c.width = get_as<int64_t>(iv, inf);
        else return false;
        return true;
      });
    } else if (k == "seed") {
      c.seed = get_as<uint64_t>(v, field);
    } else if (k == "batch") {
      c.batch = get_as<int64_t>(v, field);
    } else if (k == "data") {
      for_keys(v, field, [&](const std::string& dk, const json& dv, const std::string& df) {
        if (dk == "source") c.source = parse_data_source(get_as<std::string>(dv, df));
        else if (dk == "manifest") c.manifest = get_as<std::string>(dv, df);
        else if (dk == "split") c.split = parse_split_selector(get_as<std::string>(dv, df));
        else if (dk == "pixel_scale") c.pixel_scale = parse_pixel_scale(get_as<std::string>(dv, df));
        else return false;
        return true;
      });
    } else if (k == "out") {
      c.out = get_as<std::string>(v, field);
    } else if (k == "timing_reps") {
      c.timing_reps = get_as<int>(v, field);
    } else if (k == "warmup") {
      c.warmup = get_as<int>(v, field);
    } else if (k == "with_neck") {
      c.with_neck = get_as<bool>(v, field);
    } else {
      return false;
    }
    return true;
  });
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", path.string() + ": " + e.what());
  }
  RunConfig c = apply_json(base, doc);
  if (!c.manifest.empty() && std::filesystem::path(c.manifest).is_relative() && doc.contains("data")) {
    c.manifest = (path.parent_path() / c.manifest).lexically_normal().string();
  }
  return c;
}

}  // namespace trifuse
