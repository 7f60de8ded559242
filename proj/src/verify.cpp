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
#include "trifuse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>

#include "trifuse/events.hpp"
#include "trifuse/kernels.hpp"
#include "trifuse/metrics.hpp"
#include "trifuse/model.hpp"
#include "trifuse/npy.hpp"
#include "trifuse/preprocess.hpp"

namespace trifuse {

namespace {

using Check = std::optional<std::string>;

std::mt19937_64 rng(uint64_t seed, const char* salt) { return std::mt19937_64(splitmix64(seed ^ fnv1a(salt))); }

Tensor4 random_tensor(std::mt19937_64& gen, int64_t b, int64_t c, int64_t h, int64_t w, double lo = -1.0,
                      double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor4 t(b, c, h, w);
  for (auto& v : t.data()) v = static_cast<float>(u(gen));
  return t;
}

/// Replaces the tiny default init with O(1) weights so attention is far from uniform.
void randomize(ParamStore& store, std::mt19937_64& gen, double scale) {
  std::vector<std::string> names;
  for (const auto& [name, p] : store.entries()) names.push_back(name);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (const auto& name : names) {
    std::vector<float> v(store.values(name).size());
    for (auto& x : v) x = static_cast<float>(u(gen));
    store.set(name, std::move(v));
  }
}

ParamStore fusion_store(const FusionConfig& cfg, int64_t c, uint64_t seed) {
  ParamSpecList specs;
  declare_fusion_params(specs, cfg, 1, c);
  return ParamStore::build(specs, seed);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// Naive softmax(scale q k^T) v over double rows.
std::vector<std::vector<double>> naive_attention(const std::vector<std::vector<double>>& q,
                                                 const std::vector<std::vector<double>>& k,
                                                 const std::vector<std::vector<double>>& v, double scale) {
  std::vector<std::vector<double>> out(q.size(), std::vector<double>(v.empty() ? 0 : v[0].size(), 0.0));
  for (size_t i = 0; i < q.size(); ++i) {
    std::vector<double> s(k.size());
    double mx = -INFINITY;
    for (size_t j = 0; j < k.size(); ++j) {
      double d = 0.0;
      for (size_t t = 0; t < q[i].size(); ++t) d += q[i][t] * k[j][t];
      s[j] = d * scale;
      mx = std::max(mx, s[j]);
    }
    double z = 0.0;
    for (auto& x : s) z += (x = std::exp(x - mx));
    for (size_t j = 0; j < k.size(); ++j) {
      for (size_t t = 0; t < v[j].size(); ++t) out[i][t] += s[j] / z * v[j][t];
    }
  }
  return out;
}

std::vector<std::vector<double>> project(const TokenMatrix& x, int64_t b, const Param& w, const std::vector<float>* bias) {
  const int64_t out = w.shape[0], in = w.shape[1];
  std::vector<std::vector<double>> y(static_cast<size_t>(x.tokens()), std::vector<double>(static_cast<size_t>(out)));
  for (int64_t n = 0; n < x.tokens(); ++n) {
    for (int64_t o = 0; o < out; ++o) {
      double acc = bias ? (*bias)[static_cast<size_t>(o)] : 0.0;
      for (int64_t i = 0; i < in; ++i) acc += static_cast<double>(w.values[static_cast<size_t>(o * in + i)]) * x.at(b, n, i);
      y[static_cast<size_t>(n)][static_cast<size_t>(o)] = acc;
    }
  }
  return y;
}

Check mage_zero_spatial_identity(uint64_t seed, const FaultInjection& faults) {
  auto gen = rng(seed, "mage-zero");
  const int64_t c = 4 * std::uniform_int_distribution<int64_t>(1, 6)(gen);
  FusionConfig cfg;
  const auto params = fusion_store(cfg, c, seed);
  const Tensor4 a = random_tensor(gen, 2, c, 5, 7), b = random_tensor(gen, 2, c, 5, 7);
  FusionOptions opt;
  opt.gates.spatial = 0.0f;
  opt.faults = faults;
  const auto out = mage(a, b, params, fusion_prefix(1), opt);
  if (!bitwise_equal(out.rgb, a)) return "rgb stream changed under zero spatial gate";
  if (!bitwise_equal(out.te, b)) return "te stream changed under zero spatial gate";
  return std::nullopt;
}

Check mage_unit_gate_sum(uint64_t seed, const FaultInjection& faults) {
  auto gen = rng(seed, "mage-one");
  const int64_t c = 4 * std::uniform_int_distribution<int64_t>(1, 6)(gen);
  FusionConfig cfg;
  const auto params = fusion_store(cfg, c, seed);
  const Tensor4 a = random_tensor(gen, 1, c, 6, 4), b = random_tensor(gen, 1, c, 6, 4);
  FusionOptions opt;
  opt.gates.spatial = 1.0f;
  opt.gates.channel = 1.0f;
  opt.faults = faults;
  const auto out = mage(a, b, params, fusion_prefix(1), opt);
  double worst = 0.0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    const float expect = a.values()[i] + b.values()[i];
    worst = std::max(worst, std::abs(static_cast<double>(out.rgb.values()[i]) - expect));
  }
  if (worst != 0.0) return fmt("max |x_rgb_hat - x_rgb - x_te| = %g", worst);
  return std::nullopt;
}

Check bite_attention_oracle(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "bite");
  const int64_t c = std::array<int64_t, 3>{8, 16, 32}[std::uniform_int_distribution<size_t>(0, 2)(gen)];
  const int64_t h = std::uniform_int_distribution<int64_t>(1, 8)(gen);
  const int64_t w = std::uniform_int_distribution<int64_t>(1, 64 / h)(gen);
  FusionConfig cfg;
  cfg.mechanism = Mechanism::kBiteOnly;
  auto params = fusion_store(cfg, c, seed);
  randomize(params, gen, 0.5);
  const Tensor4 a = random_tensor(gen, 1, c, h, w), b = random_tensor(gen, 1, c, h, w);
  const TokenMatrix z = bite_exchange(a, b, params, fusion_prefix(1));
  const TokenMatrix ta = to_tokens(a), tb = to_tokens(b);
  const std::string p = fusion_prefix(1) + "bite.";
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  const auto ua = naive_attention(project(ta, 0, params.at(p + "q_a.weight"), nullptr),
                                  project(tb, 0, params.at(p + "k_b.weight"), nullptr),
                                  project(tb, 0, params.at(p + "v_b.weight"), nullptr), scale);
  const auto ub = naive_attention(project(tb, 0, params.at(p + "q_b.weight"), nullptr),
                                  project(ta, 0, params.at(p + "k_a.weight"), nullptr),
                                  project(ta, 0, params.at(p + "v_a.weight"), nullptr), scale);
  double worst = 0.0;
  for (int64_t n = 0; n < h * w; ++n) {
    for (int64_t k = 0; k < c; ++k) {
      const auto un = static_cast<size_t>(n), uk = static_cast<size_t>(k);
      worst = std::max(worst, std::abs(z.at(0, n, k) - (ta.at(0, n, k) + ua[un][uk])));
      worst = std::max(worst, std::abs(z.at(0, n, c + k) - (tb.at(0, n, k) + ub[un][uk])));
    }
  }
  if (worst > 1e-5) return fmt("max abs diff %g vs brute force", worst);
  return std::nullopt;
}

Check sra_attention_oracle(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "sra");
  const int64_t heads = std::uniform_int_distribution<int64_t>(1, 4)(gen);
  const int64_t c = heads * std::uniform_int_distribution<int64_t>(1, 32 / heads)(gen);
  const int64_t h = std::uniform_int_distribution<int64_t>(1, 8)(gen);
  const int64_t w = std::uniform_int_distribution<int64_t>(1, 64 / h)(gen);
  ParamSpecList specs;
  const std::string bp = "blk.";
  specs.norm(bp + "norm1", c);
  specs.linear(bp + "attn.q", c, c);
  specs.linear(bp + "attn.kv", c, 2 * c);
  specs.linear(bp + "attn.proj", c, c);
  auto params = ParamStore::build(specs, seed);
  randomize(params, gen, 0.5);
  const TokenMatrix t = to_tokens(random_tensor(gen, 1, c, h, w));
  const TokenMatrix got = sra_attention(t, h, w, heads, 1, params, bp);

  // Oracle: two-pass LayerNorm, per-head softmax attention, projection, residual.
  const int64_t n = h * w;
  TokenMatrix y(1, n, c);
  const auto& g = params.values(bp + "norm1.gamma");
  const auto& be = params.values(bp + "norm1.beta");
  for (int64_t i = 0; i < n; ++i) {
    double mu = 0.0, var = 0.0;
    for (int64_t k = 0; k < c; ++k) mu += t.at(0, i, k);
    mu /= static_cast<double>(c);
    for (int64_t k = 0; k < c; ++k) var += (t.at(0, i, k) - mu) * (t.at(0, i, k) - mu);
    var /= static_cast<double>(c);
    for (int64_t k = 0; k < c; ++k) {
      const auto uk = static_cast<size_t>(k);
      y.at(0, i, k) = static_cast<float>((t.at(0, i, k) - mu) / std::sqrt(var + 1e-6) * g[uk] + be[uk]);
    }
  }
  const auto q = project(y, 0, params.at(bp + "attn.q.weight"), &params.values(bp + "attn.q.bias"));
  const auto kv = project(y, 0, params.at(bp + "attn.kv.weight"), &params.values(bp + "attn.kv.bias"));
  const int64_t dh = c / heads;
  TokenMatrix att(1, n, c);
  for (int64_t hd = 0; hd < heads; ++hd) {
    std::vector<std::vector<double>> qh, kh, vh;
    for (int64_t i = 0; i < n; ++i) {
      const auto ui = static_cast<size_t>(i);
      qh.emplace_back(q[ui].begin() + hd * dh, q[ui].begin() + (hd + 1) * dh);
      kh.emplace_back(kv[ui].begin() + hd * dh, kv[ui].begin() + (hd + 1) * dh);
      vh.emplace_back(kv[ui].begin() + c + hd * dh, kv[ui].begin() + c + (hd + 1) * dh);
    }
    const auto o = naive_attention(qh, kh, vh, 1.0 / std::sqrt(static_cast<double>(dh)));
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t d = 0; d < dh; ++d) {
        att.at(0, i, hd * dh + d) = static_cast<float>(o[static_cast<size_t>(i)][static_cast<size_t>(d)]);
      }
    }
  }
  const auto pr = project(att, 0, params.at(bp + "attn.proj.weight"), &params.values(bp + "attn.proj.bias"));
  double worst = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = 0; k < c; ++k) {
      const double expect = t.at(0, i, k) + pr[static_cast<size_t>(i)][static_cast<size_t>(k)];
      worst = std::max(worst, std::abs(got.at(0, i, k) - expect));
    }
  }
  if (worst > 1e-5) return fmt("max abs diff %g vs brute force", worst);
  return std::nullopt;
}

Check cssa_nested_swaps(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "cssa");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const size_t c = std::uniform_int_distribution<size_t>(1, 512)(gen);
  std::vector<float> scores(c);
  for (auto& s : scores) s = static_cast<float>(u(gen));
  const auto m3 = swap_mask(scores, 0.3), m5 = swap_mask(scores, 0.5), m7 = swap_mask(scores, 0.7);
  const auto m0 = swap_mask(scores, 0.0), m1 = swap_mask(scores, 1.0);
  for (size_t i = 0; i < c; ++i) {
    if ((m3[i] && !m5[i]) || (m5[i] && !m7[i])) return "swap sets not nested at channel " + std::to_string(i);
    if (m0[i]) return "tau=0 swapped channel " + std::to_string(i);
    if (!m1[i]) return "tau=1 kept channel " + std::to_string(i);
  }
  return std::nullopt;
}

Check gaff_variant_counts(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "gaff");
  const int64_t c = 8 * std::uniform_int_distribution<int64_t>(1, 64)(gen);
  for (int se : {4, 8}) {
    std::array<int64_t, 2> by_guidance{};
    for (auto guidance : {Guidance::kShared, Guidance::kSeparate}) {
      for (auto merge : {Merge::kDirect, Merge::kBottleneck}) {
        FusionConfig cfg;
        cfg.mechanism = Mechanism::kGaff;
        cfg.se_ratio = se;
        cfg.guidance = guidance;
        cfg.merge = merge;
        ParamSpecList specs;
        declare_fusion_params(specs, cfg, 1, c);
        const int64_t r = c / se;
        int64_t expect = 2 * (c * r + r + r * c + c);
        expect += guidance == Guidance::kShared ? (c + 1) : 2 * (c + 1);
        expect += merge == Merge::kDirect ? (2 * c * c + c) : (2 * c * (c / 2) + c / 2 + (c / 2) * c + c);
        if (specs.total() != expect) {
          return "C=" + std::to_string(c) + " count " + std::to_string(specs.total()) + " != " + std::to_string(expect);
        }
        if (merge == Merge::kDirect) by_guidance[guidance == Guidance::kShared ? 0 : 1] = specs.total();
      }
    }
    if (!(by_guidance[0] < by_guidance[1])) return "shared guidance not cheaper than separate";
  }
  return std::nullopt;
}

Check event_inversion(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "events");
  const int64_t h = std::uniform_int_distribution<int64_t>(1, 20)(gen);
  const int64_t w = std::uniform_int_distribution<int64_t>(1, 20)(gen);
  std::vector<Event> ev(std::uniform_int_distribution<size_t>(0, 300)(gen));
  std::uniform_int_distribution<int64_t> t(0, 200000);
  for (auto& e : ev) {
    e.t = t(gen);
    e.x = static_cast<int32_t>(std::uniform_int_distribution<int64_t>(0, w - 1)(gen));
    e.y = static_cast<int32_t>(std::uniform_int_distribution<int64_t>(0, h - 1)(gen));
    e.polarity = std::bernoulli_distribution(0.5)(gen) ? 1 : -1;
  }
  std::ranges::stable_sort(ev, {}, &Event::t);
  const EventStream s(h, w, ev);
  const double center = std::uniform_real_distribution<double>(0.0, 0.2)(gen);
  const Matrix a = bin_events(s, center), b = bin_events(s.inverted(), center);
  for (size_t i = 0; i < a.values().size(); ++i) {
    if (b.values()[i] != -a.values()[i]) return "inverted frame differs at " + std::to_string(i);
    if (std::abs(a.values()[i]) > 1.0f) return "binned value outside [-1, 1]";
  }
  return std::nullopt;
}

Check npy_roundtrip(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "npy");
  std::vector<int64_t> shape;
  const int rank = std::uniform_int_distribution<int>(0, 4)(gen);
  for (int i = 0; i < rank; ++i) shape.push_back(std::uniform_int_distribution<int64_t>(0, 6)(gen));
  int64_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<float> v(static_cast<size_t>(n));
  std::uniform_int_distribution<uint32_t> bits;
  for (auto& x : v) {
    const uint32_t b = bits(gen);
    std::memcpy(&x, &b, sizeof(x));
  }
  const auto order = std::bernoulli_distribution(0.5)(gen) ? npy::ByteOrder::kBig : npy::ByteOrder::kLittle;
  const auto a = npy::from_float(shape, v, order);
  const auto bytes = npy::serialize(a);
  const auto back = npy::parse(bytes);
  if (back.shape != shape) return "shape changed";
  if (back.bytes != a.bytes) return "payload bytes changed";
  if (npy::serialize(back) != bytes) return "re-serialization differs";
  return std::nullopt;
}

Check pad_contract(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "pad");
  const int64_t h = std::uniform_int_distribution<int64_t>(1, 100)(gen);
  const int64_t w = std::uniform_int_distribution<int64_t>(1, 100)(gen);
  const Tensor4 x = random_tensor(gen, 1, 5, h, w);
  const auto p = pad_to_stride(x, 32);
  const auto& t = p.tensor;
  if (t.height() % 32 || t.width() % 32 || t.height() < h || t.width() < w || t.height() - h >= 32 ||
      t.width() - w >= 32) {
    return "padded dims " + t.shape().str();
  }
  if (p.original_h != h || p.original_w != w) return "original dims not recorded";
  for (int64_t c = 0; c < 5; ++c) {
    for (int64_t y = 0; y < t.height(); ++y) {
      for (int64_t xx = 0; xx < t.width(); ++xx) {
        const float expect = (y < h && xx < w) ? x.at(0, c, y, xx) : 0.0f;
        if (t.at(0, c, y, xx) != expect) return "content mismatch";
      }
    }
  }
  return std::nullopt;
}

Check normalize_roundtrip(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "norm");
  const auto scale = std::bernoulli_distribution(0.5)(gen) ? PixelScale::kByte : PixelScale::kUnit;
  const double hi = scale == PixelScale::kByte ? 255.0 : 1.0;
  const Tensor4 x = random_tensor(gen, 1, 5, 7, 9, 0.0, hi);
  const auto stats = NormStats::imagenet(scale);
  const Tensor4 y = denormalize(normalize(x, stats), stats);
  const double err = max_abs_diff(x.data(), y.data());
  if (err > 1e-5 * hi) return fmt("round trip error %g", err);
  return std::nullopt;
}

BackboneConfig tiny_backbone() {
  BackboneConfig b;
  b.variant = Variant::kCustom;
  b.widths = {8, 16, 24, 32};
  b.depths = {1, 1, 1, 1};
  b.heads = {1, 2, 2, 4};
  b.sr_ratios = {4, 2, 2, 1};
  return b;
}

Check pyramid_shape_independence(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "pyramid");
  const std::array<Mechanism, 5> mechs{Mechanism::kMageBite, Mechanism::kMageOnly, Mechanism::kBiteOnly,
                                       Mechanism::kCssa, Mechanism::kGaff};
  const auto subsets = StageSet::every_subset();
  const int64_t h = 32 * std::uniform_int_distribution<int64_t>(1, 3)(gen);
  const int64_t w = 32 * std::uniform_int_distribution<int64_t>(1, 3)(gen);
  const Tensor4 x = random_tensor(gen, 1, 5, h, w);
  std::vector<Shape4> reference;
  for (int k = 0; k < 3; ++k) {
    ModelConfig m;
    m.backbone = tiny_backbone();
    m.fusion.mechanism = mechs[std::uniform_int_distribution<size_t>(0, mechs.size() - 1)(gen)];
    m.fusion.stages = subsets[std::uniform_int_distribution<size_t>(0, subsets.size() - 1)(gen)];
    const auto params = init_params(m, seed);
    const auto out = run_model(m, params, x);
    std::vector<Shape4> shapes;
    for (const auto& s : out.backbone.stages) shapes.push_back(s.map.shape());
    for (const auto& l : out.pyramid.levels) shapes.push_back(l.shape());
    for (size_t i = 0; i < 5; ++i) {
      const auto& s = out.pyramid.levels[i].shape();
      const int64_t stride = out.pyramid.strides[i];
      if (s.c != kPyramidWidth || s.h != (h + stride - 1) / stride || s.w != (w + stride - 1) / stride) {
        return "level " + std::to_string(i) + " has shape " + s.str();
      }
    }
    if (reference.empty()) reference = shapes;
    if (shapes != reference) {
      return std::string("shapes differ for ") + std::string(to_string(m.fusion.mechanism)) + " at " +
             m.fusion.stages.str();
    }
  }
  return std::nullopt;
}

Check deterministic_init(uint64_t seed, const FaultInjection&) {
  ModelConfig m;
  m.backbone = tiny_backbone();
  const auto a = init_params(m, seed), b = init_params(m, seed), c = init_params(m, seed + 1);
  if (!(a == b)) return "same seed produced different parameters";
  if (a == c) return "different seeds produced identical parameters";
  for (const auto& [name, p] : a.entries()) {
    for (float v : p.values) {
      if (std::abs(v) > 2 * kInitStd && !(name.ends_with(".gamma") && v == 1.0f)) return name + " outside truncation";
    }
  }
  return std::nullopt;
}

std::vector<GroundTruth> random_gts(std::mt19937_64& gen, int images, int per_image) {
  std::uniform_real_distribution<double> pos(0.0, 80.0), size(5.0, 40.0);
  std::vector<GroundTruth> gts;
  for (int i = 0; i < images; ++i) {
    for (int k = 0; k < per_image; ++k) {
      const double x = pos(gen), y = pos(gen);
      gts.push_back({std::to_string(i), {x, y, x + size(gen), y + size(gen)}, 0});
    }
  }
  return gts;
}

std::vector<Detection> random_dets(std::mt19937_64& gen, const std::vector<GroundTruth>& gts, int images, int n) {
  std::uniform_real_distribution<double> pos(0.0, 80.0), size(5.0, 40.0), u(0.0, 1.0), jit(-6.0, 6.0);
  std::vector<Detection> dets;
  for (int k = 0; k < n; ++k) {
    Detection d;
    if (!gts.empty() && u(gen) < 0.6) {
      const auto& g = gts[std::uniform_int_distribution<size_t>(0, gts.size() - 1)(gen)];
      d.image_id = g.image_id;
      d.box = {g.box.x1 + jit(gen), g.box.y1 + jit(gen), g.box.x2 + jit(gen), g.box.y2 + jit(gen)};
      if (d.box.x2 <= d.box.x1) d.box.x2 = d.box.x1 + 1.0;
      if (d.box.y2 <= d.box.y1) d.box.y2 = d.box.y1 + 1.0;
    } else {
      d.image_id = std::to_string(std::uniform_int_distribution<int>(0, images - 1)(gen));
      const double x = pos(gen), y = pos(gen);
      d.box = {x, y, x + size(gen), y + size(gen)};
    }
    d.score = u(gen);
    dets.push_back(d);
  }
  return dets;
}

GroundTruthSet as_set(const std::vector<GroundTruth>& gts, int images) {
  GroundTruthSet s;
  for (int i = 0; i < images; ++i) s.add_image(std::to_string(i));
  for (const auto& g : gts) s.add(g);
  return s;
}

Check metrics_properties(uint64_t seed, const FaultInjection&) {
  auto gen = rng(seed, "metrics");
  const int images = std::uniform_int_distribution<int>(1, 4)(gen);
  const auto gts = random_gts(gen, images, std::uniform_int_distribution<int>(0, 4)(gen));
  const auto dets = random_dets(gen, gts, images, std::uniform_int_distribution<int>(0, 20)(gen));
  const auto set = as_set(gts, images);
  const auto base = evaluate(dets, set);

  for (const auto& a : dets) {
    for (const auto& g : gts) {
      if (iou(a.box, g.box) != iou(g.box, a.box)) return std::string("iou not symmetric");
      const double v = iou(a.box, g.box);
      if (v < 0.0 || v > std::min(box_area(a.box), box_area(g.box)) / std::max(box_area(a.box), box_area(g.box)) + 1e-12) {
        return fmt("iou %g outside area-ratio bound", v);
      }
    }
  }
  for (size_t j = 0; j < base.ap.size(); ++j) {
    if (base.ap[j] < 0.0 || base.ap[j] > 1.0) return fmt("AP %g outside [0,1]", base.ap[j]);
    if (j > 0 && base.ap[j] > base.ap[j - 1]) return fmt("AP rises with IoU threshold (%g > %g)", base.ap[j], base.ap[j - 1]);
  }
  if (base.map > *std::max_element(base.ap.begin(), base.ap.end()) + 1e-15) return std::string("mAP above max AP");

  auto mono = dets;
  for (auto& d : mono) d.score = 0.05 + 0.9 * d.score * d.score * d.score;
  const auto r2 = evaluate(mono, set);
  if (r2.ap != base.ap) return std::string("score-monotone transform changed the report");

  auto dup = dets;
  dup.insert(dup.end(), dets.begin(), dets.end());
  const auto r3 = evaluate(dup, set);
  if (r3.map50 > base.map50) return fmt("duplicates raised mAP50 %g -> %g", base.map50, r3.map50);
  return std::nullopt;
}

}  // namespace

const std::vector<Property>& property_registry() {
  static const std::vector<Property> registry{
      {"mage.zero_spatial_gate_identity", mage_zero_spatial_identity},
      {"mage.unit_gate_residual_sum", mage_unit_gate_sum},
      {"bite.cross_attention_oracle", bite_attention_oracle},
      {"sra.attention_oracle", sra_attention_oracle},
      {"cssa.nested_swap_sets", cssa_nested_swaps},
      {"gaff.variant_param_counts", gaff_variant_counts},
      {"events.polarity_inversion", event_inversion},
      {"npy.roundtrip", npy_roundtrip},
      {"preprocess.pad_to_stride", pad_contract},
      {"preprocess.normalize_roundtrip", normalize_roundtrip},
      {"neck.pyramid_shape_independence", pyramid_shape_independence},
      {"params.deterministic_init", deterministic_init},
      {"metrics.invariants", metrics_properties},
  };
  return registry;
}

bool VerifySummary::ok() const {
  return std::ranges::all_of(results, [](const PropertyResult& r) { return r.passed == r.runs; });
}

std::string VerifySummary::str() const {
  std::ostringstream os;
  for (const auto& r : results) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-36s %4d/%-4d %s", r.name.c_str(), r.passed, r.runs,
                  r.passed == r.runs ? "ok" : "FAIL");
    os << buf;
    if (r.first_failing_seed) os << "  seed=" << *r.first_failing_seed << "  " << r.detail;
    os << '\n';
  }
  return os.str();
}

VerifySummary cmd_verify(int seed_count, uint64_t base_seed, const FaultInjection& faults, const std::string& filter) {
  VerifySummary summary;
  for (const auto& prop : property_registry()) {
    if (!filter.empty() && prop.name.find(filter) == std::string::npos) continue;
    PropertyResult r;
    r.name = prop.name;
    for (int i = 0; i < seed_count; ++i) {
      const uint64_t seed = base_seed + static_cast<uint64_t>(i);
      std::optional<std::string> failure;
      try {
        failure = prop.check(seed, faults);
      } catch (const std::exception& e) {
        failure = std::string("exception: ") + e.what();
      }
      ++r.runs;
      if (!failure) {
        ++r.passed;
      } else if (!r.first_failing_seed) {
        r.first_failing_seed = seed;
        r.detail = *failure;
      }
    }
    summary.results.push_back(std::move(r));
  }
  return summary;
}

}  // namespace trifuse
