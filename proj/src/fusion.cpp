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
#include "trifuse/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "trifuse/errors.hpp"
#include "trifuse/kernels.hpp"

namespace trifuse {

namespace {

int64_t reduced(int64_t c, int64_t r) { return std::max<int64_t>(1, c / r); }

void check_pair(const Tensor4& a, const Tensor4& b, const char* op) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError(std::string(op) + ": stream shapes differ " + a.shape().str() + " vs " + b.shape().str());
  }
}

Tensor4 conv1x1(const Tensor4& x, const ParamStore& p, const std::string& name) {
  return conv2d(x, p.at(name + ".weight"), p.values(name + ".bias"), 1, 0, 1);
}

/// Fully connected layer on pooled (B, C) descriptors.
Matrix dense(const Matrix& x, const ParamStore& p, const std::string& name) {
  TokenMatrix t(x.rows(), 1, x.cols(), std::vector<float>(x.data().begin(), x.data().end()));
  auto y = linear(t, p.at(name + ".weight"), p.values(name + ".bias"));
  return Matrix(x.rows(), y.channels(), std::vector<float>(y.data().begin(), y.data().end()));
}

void relu(Matrix& m) { relu_inplace(m.data()); }

double mean(std::span<const float> v) {
  double s = 0.0;
  for (float f : v) s += f;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

bool use_override(const FusionOptions& o) { return !o.faults.ignore_gate_override; }

}  // namespace

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::kMageBite: return "mage_bite";
    case Mechanism::kMageOnly: return "mage_only";
    case Mechanism::kBiteOnly: return "bite_only";
    case Mechanism::kCssa: return "cssa";
    case Mechanism::kGaff: return "gaff";
    case Mechanism::kNone: return "none";
  }
  return "none";
}

std::string_view to_string(Guidance g) { return g == Guidance::kShared ? "shared" : "separate"; }
std::string_view to_string(Merge m) { return m == Merge::kDirect ? "direct" : "bottleneck"; }

Mechanism parse_mechanism(std::string_view s) {
  for (auto m : {Mechanism::kMageBite, Mechanism::kMageOnly, Mechanism::kBiteOnly, Mechanism::kCssa,
                 Mechanism::kGaff, Mechanism::kNone}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("fusion.mechanism", "unknown mechanism \"" + std::string(s) + "\"");
}

Guidance parse_guidance(std::string_view s) {
  if (s == "shared") return Guidance::kShared;
  if (s == "separate") return Guidance::kSeparate;
  throw ConfigError("fusion.guidance", "expected shared|separate, got \"" + std::string(s) + "\"");
}

Merge parse_merge(std::string_view s) {
  if (s == "direct") return Merge::kDirect;
  if (s == "bottleneck") return Merge::kBottleneck;
  throw ConfigError("fusion.merge", "expected direct|bottleneck, got \"" + std::string(s) + "\"");
}

StageSet StageSet::parse(std::string_view s) {
  StageSet set;
  if (s.empty() || s == "none" || s == "-") return set;
  if (s.front() != 's') throw ConfigError("fusion.stages", "expected e.g. \"s1234\", got \"" + std::string(s) + "\"");
  for (char ch : s.substr(1)) {
    if (ch < '1' || ch > '4') {
      throw ConfigError("fusion.stages", "stage digits must be 1-4 in \"" + std::string(s) + "\"");
    }
    set.bits_[static_cast<size_t>(ch - '1')] = true;
  }
  return set;
}

StageSet StageSet::of(std::initializer_list<int> stages) {
  StageSet set;
  for (int s : stages) {
    if (s < 1 || s > 4) throw ConfigError("fusion.stages", "stage " + std::to_string(s) + " outside 1..4");
    set.bits_[static_cast<size_t>(s - 1)] = true;
  }
  return set;
}

std::vector<StageSet> StageSet::every_subset() {
  std::vector<StageSet> out;
  for (int mask = 0; mask < 16; ++mask) {
    StageSet s;
    for (int i = 0; i < 4; ++i) s.bits_[static_cast<size_t>(i)] = (mask >> i) & 1;
    out.push_back(s);
  }
  return out;
}

bool StageSet::empty() const { return !(bits_[0] || bits_[1] || bits_[2] || bits_[3]); }

std::string StageSet::str() const {
  if (empty()) return "none";
  std::string s = "s";
  for (int i = 0; i < 4; ++i) {
    if (bits_[static_cast<size_t>(i)]) s += static_cast<char>('1' + i);
  }
  return s;
}

void FusionConfig::validate(const std::array<int64_t, 4>& widths) const {
  if (mechanism == Mechanism::kCssa && !(tau >= 0.0 && tau <= 1.0)) {
    throw ConfigError("fusion.tau", "must lie in [0,1], got " + std::to_string(tau));
  }
  if (mechanism != Mechanism::kGaff) return;
  if (se_ratio != 4 && se_ratio != 8) {
    throw ConfigError("fusion.se_ratio", "must be 4 or 8, got " + std::to_string(se_ratio));
  }
  for (int s = 1; s <= 4; ++s) {
    if (!stages.contains(s)) continue;
    const int64_t c = widths[static_cast<size_t>(s - 1)];
    if (c % se_ratio != 0) {
      throw ConfigError("fusion.se_ratio", "stage " + std::to_string(s) + " width " + std::to_string(c) +
                                               " not divisible by " + std::to_string(se_ratio));
    }
    if (merge == Merge::kBottleneck && c % 2 != 0) {
      throw ConfigError("fusion.merge", "bottleneck merge needs an even width at stage " + std::to_string(s));
    }
  }
}

std::string fusion_prefix(int stage) { return "fusion.s" + std::to_string(stage) + "."; }

namespace {

void declare_mage(ParamSpecList& specs, const std::string& p, int64_t c) {
  const int64_t hid = reduced(c, 4);
  specs.linear(p + "mage.trunk", 2 * c, hid);
  specs.linear(p + "mage.head_te2rgb", hid, c);
  specs.linear(p + "mage.head_rgb2te", hid, c);
  specs.conv(p + "mage.spatial1", 2 * c, hid, 1);
  specs.conv(p + "mage.spatial2", hid, 2, 1);
}

void declare_bite(ParamSpecList& specs, const std::string& p, int64_t c) {
  for (const char* s : {"a", "b"}) {
    specs.linear(p + "bite.q_" + s, c, c, false);
    specs.linear(p + "bite.k_" + s, c, c, false);
    specs.linear(p + "bite.v_" + s, c, c, false);
  }
  specs.conv(p + "bite.dw", 2 * c, 2 * c, 3, 2 * c);
  specs.conv(p + "bite.proj", 2 * c, c, 1);
}

}  // namespace

void declare_fusion_params(ParamSpecList& specs, const FusionConfig& config, int stage, int64_t c) {
  const std::string p = fusion_prefix(stage);
  switch (config.mechanism) {
    case Mechanism::kMageBite:
      declare_mage(specs, p, c);
      declare_bite(specs, p, c);
      break;
    case Mechanism::kMageOnly:
      declare_mage(specs, p, c);
      specs.conv(p + "merge", 2 * c, c, 1);
      break;
    case Mechanism::kBiteOnly:
      declare_bite(specs, p, c);
      break;
    case Mechanism::kCssa:
      specs.weight(p + "cssa.eca_a.weight", {3});
      specs.weight(p + "cssa.eca_b.weight", {3});
      specs.conv(p + "cssa.spatial", 2 * c, 1, 3);
      break;
    case Mechanism::kGaff: {
      const int64_t hid = reduced(c, config.se_ratio);
      for (const char* s : {"a", "b"}) {
        specs.linear(p + "gaff.se_" + s + ".fc1", c, hid);
        specs.linear(p + "gaff.se_" + s + ".fc2", hid, c);
      }
      if (config.guidance == Guidance::kShared) {
        specs.conv(p + "gaff.guide", c, 1, 1);
      } else {
        specs.conv(p + "gaff.guide_a", c, 1, 1);
        specs.conv(p + "gaff.guide_b", c, 1, 1);
      }
      if (config.merge == Merge::kDirect) {
        specs.conv(p + "gaff.merge", 2 * c, c, 1);
      } else {
        specs.conv(p + "gaff.merge1", 2 * c, c / 2, 1);
        specs.conv(p + "gaff.merge2", c / 2, c, 1);
      }
      break;
    }
    case Mechanism::kNone:
      break;
  }
}

MageOutput mage(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix,
                const FusionOptions& options) {
  check_pair(x_rgb, x_te, "mage");
  const auto& s = x_rgb.shape();
  const std::string p = prefix + "mage.";
  const Tensor4 z = concat_channels(x_rgb, x_te);

  // Channel gates: avg and max summaries share the trunk and each head;
  // the two branch logits are summed before the sigmoid.
  Matrix h_avg = dense(global_avg_pool(z), params, p + "trunk");
  Matrix h_max = dense(global_max_pool(z), params, p + "trunk");
  relu(h_avg);
  relu(h_max);
  auto channel_gate = [&](const std::string& head) {
    Matrix a = dense(h_avg, params, p + head);
    Matrix m = dense(h_max, params, p + head);
    Tensor4 g(s.b, s.c, 1, 1);
    for (int64_t b = 0; b < s.b; ++b) {
      for (int64_t c = 0; c < s.c; ++c) {
        g.at(b, c, 0, 0) = sigmoid(static_cast<float>(static_cast<double>(a.at(b, c)) + m.at(b, c)));
      }
    }
    return g;
  };

  MageOutput out;
  out.gates.channel_te_to_rgb = channel_gate("head_te2rgb");
  out.gates.channel_rgb_to_te = channel_gate("head_rgb2te");

  Tensor4 spatial = conv1x1(z, params, p + "spatial1");
  relu_inplace(spatial.data());
  spatial = conv1x1(spatial, params, p + "spatial2");
  sigmoid_inplace(spatial.data());
  out.gates.spatial_te_to_rgb = slice_channels(spatial, 0, 1);
  out.gates.spatial_rgb_to_te = slice_channels(spatial, 1, 2);

  if (use_override(options)) {
    if (options.gates.channel) {
      std::ranges::fill(out.gates.channel_te_to_rgb.data(), *options.gates.channel);
      std::ranges::fill(out.gates.channel_rgb_to_te.data(), *options.gates.channel);
    }
    if (options.gates.spatial) {
      std::ranges::fill(out.gates.spatial_te_to_rgb.data(), *options.gates.spatial);
      std::ranges::fill(out.gates.spatial_rgb_to_te.data(), *options.gates.spatial);
    }
  }

  auto exchange = [&](const Tensor4& self, const Tensor4& other, const Tensor4& wc, const Tensor4& ws) {
    Tensor4 r = self;
    for (int64_t b = 0; b < s.b; ++b) {
      auto gate_s = ws.plane(b, 0);
      for (int64_t c = 0; c < s.c; ++c) {
        const float gate_c = wc.at(b, c, 0, 0);
        auto dst = r.plane(b, c);
        auto src = other.plane(b, c);
        for (size_t i = 0; i < dst.size(); ++i) {
          const float d = gate_s[i] * (gate_c * src[i]);
          if (d != 0.0f) dst[i] = dst[i] + d;
        }
      }
    }
    return r;
  };
  out.rgb = exchange(x_rgb, x_te, out.gates.channel_te_to_rgb, out.gates.spatial_te_to_rgb);
  out.te = exchange(x_te, x_rgb, out.gates.channel_rgb_to_te, out.gates.spatial_rgb_to_te);
  return out;
}

TokenMatrix bite_exchange(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                          const std::string& prefix) {
  check_pair(x_rgb, x_te, "bite");
  const auto& s = x_rgb.shape();
  const std::string p = prefix + "bite.";
  const TokenMatrix ta = to_tokens(x_rgb);
  const TokenMatrix tb = to_tokens(x_te);
  const std::span<const float> no_bias;
  const TokenMatrix qa = linear(ta, params.at(p + "q_a.weight"), no_bias);
  const TokenMatrix ka = linear(ta, params.at(p + "k_a.weight"), no_bias);
  const TokenMatrix va = linear(ta, params.at(p + "v_a.weight"), no_bias);
  const TokenMatrix qb = linear(tb, params.at(p + "q_b.weight"), no_bias);
  const TokenMatrix kb = linear(tb, params.at(p + "k_b.weight"), no_bias);
  const TokenMatrix vb = linear(tb, params.at(p + "v_b.weight"), no_bias);
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.c));

  // Z = [T~_a ; T~_b] with T~_s = T_s + softmax(Q_s K_other^T / sqrt(C)) V_other.
  TokenMatrix z(s.b, s.h * s.w, 2 * s.c);
  for (int64_t b = 0; b < s.b; ++b) {
    const Matrix upd_a = attention(batch_rows(qa, b), batch_rows(kb, b), batch_rows(vb, b), scale);
    const Matrix upd_b = attention(batch_rows(qb, b), batch_rows(ka, b), batch_rows(va, b), scale);
    for (int64_t n = 0; n < s.h * s.w; ++n) {
      for (int64_t c = 0; c < s.c; ++c) {
        z.at(b, n, c) = ta.at(b, n, c) + upd_a.at(n, c);
        z.at(b, n, s.c + c) = tb.at(b, n, c) + upd_b.at(n, c);
      }
    }
  }
  return z;
}

Tensor4 bite(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix) {
  const auto& s = x_rgb.shape();
  const std::string p = prefix + "bite.";
  Tensor4 u = to_map(bite_exchange(x_rgb, x_te, params, prefix), s.h, s.w);
  u = conv2d(u, params.at(p + "dw.weight"), params.values(p + "dw.bias"), 1, 1, static_cast<int>(2 * s.c));
  return conv1x1(u, params, p + "proj");
}

namespace {

void record_gates(const GatePack& g, FusionDiagnostics* diag) {
  if (!diag) return;
  diag->stats["mage.channel_te2rgb_mean"] = mean(g.channel_te_to_rgb.data());
  diag->stats["mage.channel_rgb2te_mean"] = mean(g.channel_rgb_to_te.data());
  diag->stats["mage.spatial_te2rgb_mean"] = mean(g.spatial_te_to_rgb.data());
  diag->stats["mage.spatial_rgb2te_mean"] = mean(g.spatial_rgb_to_te.data());
}

}  // namespace

Tensor4 mage_bite(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix,
                  const FusionOptions& options, FusionDiagnostics* diag) {
  auto rect = mage(x_rgb, x_te, params, prefix, options);
  record_gates(rect.gates, diag);
  return bite(rect.rgb, rect.te, params, prefix);
}

Tensor4 mage_only(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix,
                  const FusionOptions& options, FusionDiagnostics* diag) {
  auto rect = mage(x_rgb, x_te, params, prefix, options);
  record_gates(rect.gates, diag);
  return conv1x1(concat_channels(rect.rgb, rect.te), params, prefix + "merge");
}

Tensor4 bite_only(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix) {
  return bite(x_rgb, x_te, params, prefix);
}

std::vector<bool> swap_mask(std::span<const float> scores, double tau) {
  std::vector<bool> mask(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) mask[i] = static_cast<double>(scores[i]) < tau;
  return mask;
}

Tensor4 switch_channels(const Tensor4& self, const Tensor4& other, const Matrix& scores, double tau) {
  check_pair(self, other, "switch_channels");
  if (scores.rows() != self.batch() || scores.cols() != self.channels()) {
    throw ShapeError("switch_channels: scores must be (B, C)");
  }
  Tensor4 out = self;
  for (int64_t b = 0; b < self.batch(); ++b) {
    const auto mask = swap_mask(scores.row(b), tau);
    for (int64_t c = 0; c < self.channels(); ++c) {
      if (mask[static_cast<size_t>(c)]) std::ranges::copy(other.plane(b, c), out.plane(b, c).begin());
    }
  }
  return out;
}

Matrix cssa_scores(const Tensor4& x, const Param& kernel) {
  if (kernel.values.size() != 3) throw ShapeError("cssa: channel kernel must have 3 taps");
  const Matrix pooled = global_avg_pool(x);
  Matrix scores(pooled.rows(), pooled.cols());
  const auto& k = kernel.values;
  for (int64_t b = 0; b < pooled.rows(); ++b) {
    for (int64_t c = 0; c < pooled.cols(); ++c) {
      double acc = 0.0;
      for (int64_t t = -1; t <= 1; ++t) {
        const int64_t j = c + t;
        if (j < 0 || j >= pooled.cols()) continue;
        acc += static_cast<double>(k[static_cast<size_t>(t + 1)]) * pooled.at(b, j);
      }
      scores.at(b, c) = sigmoid(static_cast<float>(acc));
    }
  }
  return scores;
}

Tensor4 cssa(const Tensor4& x_a, const Tensor4& x_b, double tau, const ParamStore& params, const std::string& prefix,
             const FusionOptions& options, FusionDiagnostics* diag) {
  check_pair(x_a, x_b, "cssa");
  const std::string p = prefix + "cssa.";
  Matrix score_a = cssa_scores(x_a, params.at(p + "eca_a.weight"));
  Matrix score_b = cssa_scores(x_b, params.at(p + "eca_b.weight"));
  if (use_override(options) && options.gates.channel) {
    std::ranges::fill(score_a.data(), *options.gates.channel);
    std::ranges::fill(score_b.data(), *options.gates.channel);
  }
  const Tensor4 sw_a = switch_channels(x_a, x_b, score_a, tau);
  const Tensor4 sw_b = switch_channels(x_b, x_a, score_b, tau);

  Tensor4 mask = conv2d(concat_channels(sw_a, sw_b), params.at(p + "spatial.weight"), params.values(p + "spatial.bias"),
                        1, 1, 1);
  sigmoid_inplace(mask.data());
  if (use_override(options) && options.gates.spatial) std::ranges::fill(mask.data(), *options.gates.spatial);

  const auto& s = x_a.shape();
  Tensor4 out(s.b, s.c, s.h, s.w);
  for (int64_t b = 0; b < s.b; ++b) {
    auto m = mask.plane(b, 0);
    for (int64_t c = 0; c < s.c; ++c) {
      auto pa = sw_a.plane(b, c);
      auto pb = sw_b.plane(b, c);
      auto dst = out.plane(b, c);
      for (size_t i = 0; i < dst.size(); ++i) dst[i] = m[i] * pa[i] + (1.0f - m[i]) * pb[i];
    }
  }
  if (diag) {
    auto frac = [tau](const Matrix& sc) {
      const auto mask_v = swap_mask(sc.data(), tau);
      return mask_v.empty() ? 0.0
                            : static_cast<double>(std::count(mask_v.begin(), mask_v.end(), true)) /
                                  static_cast<double>(mask_v.size());
    };
    diag->stats["cssa.swap_fraction_a"] = frac(score_a);
    diag->stats["cssa.swap_fraction_b"] = frac(score_b);
    diag->stats["cssa.mask_mean"] = mean(mask.data());
  }
  return out;
}

Tensor4 gaff(const Tensor4& x_a, const Tensor4& x_b, int se_ratio, Guidance guidance, Merge merge,
             const ParamStore& params, const std::string& prefix, const FusionOptions& options,
             FusionDiagnostics* diag) {
  check_pair(x_a, x_b, "gaff");
  const auto& s = x_a.shape();
  if (s.c % se_ratio != 0) {
    throw ConfigError("fusion.se_ratio", "width " + std::to_string(s.c) + " not divisible by " + std::to_string(se_ratio));
  }
  const std::string p = prefix + "gaff.";
  const bool force = use_override(options);

  auto excite = [&](const Tensor4& x, const std::string& name) {
    Matrix h = dense(global_avg_pool(x), params, p + name + ".fc1");
    relu(h);
    Matrix e = dense(h, params, p + name + ".fc2");
    sigmoid_inplace(e.data());
    if (force && options.gates.channel) std::ranges::fill(e.data(), *options.gates.channel);
    Tensor4 r = x;
    for (int64_t b = 0; b < s.b; ++b) {
      for (int64_t c = 0; c < s.c; ++c) {
        const float w = e.at(b, c);
        for (auto& v : r.plane(b, c)) v *= w;
      }
    }
    return std::pair{r, mean(e.data())};
  };
  const auto [xa, se_mean_a] = excite(x_a, "se_a");
  const auto [xb, se_mean_b] = excite(x_b, "se_b");

  // guide_a predicts the map that corrects stream a from stream b's features.
  const std::string head_a = guidance == Guidance::kShared ? "guide" : "guide_a";
  const std::string head_b = guidance == Guidance::kShared ? "guide" : "guide_b";
  auto guide = [&](const Tensor4& src, const std::string& head) {
    Tensor4 g = conv1x1(src, params, p + head);
    sigmoid_inplace(g.data());
    if (force && options.gates.spatial) std::ranges::fill(g.data(), *options.gates.spatial);
    return g;
  };
  const Tensor4 g_b2a = guide(xb, head_a);
  const Tensor4 g_a2b = guide(xa, head_b);

  auto inject = [&](const Tensor4& self, const Tensor4& other, const Tensor4& g) {
    Tensor4 r = self;
    for (int64_t b = 0; b < s.b; ++b) {
      auto gm = g.plane(b, 0);
      for (int64_t c = 0; c < s.c; ++c) {
        auto dst = r.plane(b, c);
        auto src = other.plane(b, c);
        for (size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] + gm[i] * src[i];
      }
    }
    return r;
  };
  const Tensor4 cat = concat_channels(inject(xa, xb, g_b2a), inject(xb, xa, g_a2b));

  if (diag) {
    diag->stats["gaff.se_mean_a"] = se_mean_a;
    diag->stats["gaff.se_mean_b"] = se_mean_b;
    diag->stats["gaff.guidance_b2a_mean"] = mean(g_b2a.data());
    diag->stats["gaff.guidance_a2b_mean"] = mean(g_a2b.data());
  }
  if (merge == Merge::kDirect) return conv1x1(cat, params, p + "merge");
  Tensor4 h = conv1x1(cat, params, p + "merge1");
  relu_inplace(h.data());
  return conv1x1(h, params, p + "merge2");
}

Tensor4 fuse(const FusionConfig& config, int stage, const Tensor4& x_a, const Tensor4& x_b, const ParamStore& params,
             const FusionOptions& options, FusionDiagnostics* diag) {
  const std::string prefix = fusion_prefix(stage);
  if (diag) {
    diag->stage = stage;
    diag->mechanism = std::string(to_string(config.mechanism));
  }
  switch (config.mechanism) {
    case Mechanism::kMageBite: return mage_bite(x_a, x_b, params, prefix, options, diag);
    case Mechanism::kMageOnly: return mage_only(x_a, x_b, params, prefix, options, diag);
    case Mechanism::kBiteOnly: return bite_only(x_a, x_b, params, prefix);
    case Mechanism::kCssa: return cssa(x_a, x_b, config.tau, params, prefix, options, diag);
    case Mechanism::kGaff:
      return gaff(x_a, x_b, config.se_ratio, config.guidance, config.merge, params, prefix, options, diag);
    case Mechanism::kNone: break;
  }
  throw ConfigError("fusion.mechanism", "\"none\" does not fuse");
}

}  // namespace trifuse
