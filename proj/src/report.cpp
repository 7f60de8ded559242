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
#include "trifuse/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "trifuse/errors.hpp"

namespace trifuse {

using json = nlohmann::json;

namespace {

json shape_json(const Shape4& s) { return json::array({s.b, s.c, s.h, s.w}); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string RunReport::shapes_hash() const {
  std::string s;
  for (const auto& sh : stage_shapes) s += sh.str() + ";";
  for (const auto& sh : pyramid_shapes) s += sh.str() + ";";
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

json to_json(const EvalReport& r) {
  return {{"map", r.map},       {"map50", r.map50}, {"ap", r.ap},     {"flagged", r.flagged},
          {"tp50", r.tp50},     {"fp50", r.fp50},   {"fn50", r.fn50}};
}

json RunReport::to_json() const {
  json j;
  j["key"] = key();
  j["config"] = config.to_json();
  j["ok"] = ok;
  if (!ok) {
    j["error"] = error;
    return j;
  }
  j["input_shape"] = shape_json(input_shape);
  j["stage_shapes"] = json::array();
  for (const auto& s : stage_shapes) j["stage_shapes"].push_back(shape_json(s));
  j["pyramid_shapes"] = json::array();
  for (const auto& s : pyramid_shapes) j["pyramid_shapes"].push_back(shape_json(s));
  j["shapes_hash"] = shapes_hash();
  j["params"] = {{"stream_a", params.stream_a}, {"stream_b", params.stream_b}, {"fusion", params.fusion},
                 {"neck", params.neck},         {"encoder", params.encoder()}, {"total", params.total()}};
  j["forward_ms"] = forward_ms;
  j["median_ms"] = median_ms;
  j["diagnostics"] = json::array();
  for (const auto& d : diagnostics) {
    j["diagnostics"].push_back({{"stage", d.stage}, {"mechanism", d.mechanism}, {"stats", d.stats}});
  }
  if (eval) j["eval"] = trifuse::to_json(*eval);
  return j;
}

Tensor4 build_input(const RunConfig& config) {
  Tensor4 x(config.batch, 5, config.height, config.width);
  NormStats stats = NormStats::imagenet(config.pixel_scale);
  if (config.source == DataSource::kSynthetic) {
    std::mt19937_64 gen(splitmix64(config.seed ^ fnv1a("input")));
    const double hi = config.pixel_scale == PixelScale::kByte ? 255.0 : 1.0;
    std::uniform_real_distribution<double> rgb(0.0, hi), te(-1.0, 1.0);
    for (int64_t b = 0; b < config.batch; ++b) {
      for (int64_t c = 0; c < 5; ++c) {
        for (auto& v : x.plane(b, c)) v = static_cast<float>(c < 3 ? rgb(gen) : te(gen));
      }
    }
  } else {
    const auto selected = filter_split(load_manifest(config.manifest), config.split);
    if (selected.size() < static_cast<size_t>(config.batch)) {
      throw ValidationError("manifest " + config.manifest + " has " + std::to_string(selected.size()) +
                            " frames in split " + std::string(to_string(config.split)) + ", batch needs " +
                            std::to_string(config.batch));
    }
    stats = compute_stats(selected, {3, 4}, config.pixel_scale);
    for (int64_t b = 0; b < config.batch; ++b) {
      const auto frame = load_entry(selected, static_cast<size_t>(b));
      if (frame.pixels.height() != config.height || frame.pixels.width() != config.width) {
        throw ValidationError("frame " + std::to_string(b) + " is " + frame.pixels.shape().str() +
                              " but the run expects " + std::to_string(config.height) + "x" +
                              std::to_string(config.width));
      }
      for (int64_t c = 0; c < 5; ++c) std::ranges::copy(frame.pixels.plane(0, c), x.plane(b, c).begin());
    }
  }
  return pad_to_stride(normalize(x, stats), 32).tensor;
}

RunReport run_once(const RunConfig& config, const FusionOptions& options) {
  config.validate();
  RunReport rep;
  rep.config = config;
  const ModelConfig model = config.model();
  rep.params = count_params(model);
  const ParamStore params = init_params(model, config.seed);
  const Tensor4 x = build_input(config);
  rep.input_shape = x.shape();

  for (int i = 0; i < config.warmup; ++i) run_model(model, params, x, options);
  ModelOutput out;
  for (int i = 0; i < config.timing_reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    out = run_model(model, params, x, options);
    const auto t1 = std::chrono::steady_clock::now();
    rep.forward_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  rep.median_ms = median(rep.forward_ms);
  for (size_t i = 0; i < 4; ++i) rep.stage_shapes[i] = out.backbone.stages[i].map.shape();
  if (config.with_neck) {
    for (size_t i = 0; i < 5; ++i) rep.pyramid_shapes[i] = out.pyramid.levels[i].shape();
  }
  rep.diagnostics = out.backbone.diagnostics;
  rep.ok = true;
  return rep;
}

std::string csv_header() {
  return "key,variant,mechanism,stages,tau,se_ratio,guidance,merge,modalities,height,width,batch,seed,ok,"
         "shapes_hash,params_encoder,params_fusion,params_total,median_ms,error\n";
}

std::string csv_row(const RunReport& r) {
  const auto& c = r.config;
  std::ostringstream os;
  os << csv_field(r.key()) << ',' << to_string(c.backbone.variant) << ',' << to_string(c.fusion.mechanism) << ','
     << c.fusion.stages.str() << ',' << c.fusion.tau << ',' << c.fusion.se_ratio << ','
     << to_string(c.fusion.guidance) << ',' << to_string(c.fusion.merge) << ',' << c.modalities.str() << ','
     << c.height << ',' << c.width << ',' << c.batch << ',' << c.seed << ',' << (r.ok ? "true" : "false") << ',';
  if (r.ok) {
    os << r.shapes_hash() << ',' << r.params.encoder() << ',' << r.params.fusion << ',' << r.params.total() << ','
       << r.median_ms << ',';
  } else {
    os << ",,,,," << csv_field(r.error);
  }
  os << '\n';
  return os.str();
}

}  // namespace trifuse
