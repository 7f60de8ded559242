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
#include "trifuse/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "trifuse/errors.hpp"
#include "trifuse/kernels.hpp"

namespace trifuse {

namespace {

std::string stage_prefix(const std::string& stream, int stage) {
  return stream + "s" + std::to_string(stage) + ".";
}

std::string block_prefix(const std::string& stream, int stage, int64_t block) {
  return stage_prefix(stream, stage) + "block" + std::to_string(block) + ".";
}

TokenMatrix norm(const TokenMatrix& t, const ParamStore& p, const std::string& name) {
  return layer_norm(t, p.values(name + ".gamma"), p.values(name + ".beta"), 1e-6);
}

TokenMatrix dense(const TokenMatrix& t, const ParamStore& p, const std::string& name) {
  return linear(t, p.at(name + ".weight"), p.values(name + ".bias"));
}

TokenMatrix add_tokens(const TokenMatrix& a, const TokenMatrix& b) {
  TokenMatrix out = a;
  auto d = out.data();
  auto s = b.data();
  for (size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  return out;
}

Tensor4 select_channels(const Tensor4& x, const std::vector<int>& channels) {
  Tensor4 out(x.batch(), static_cast<int64_t>(channels.size()), x.height(), x.width());
  for (int64_t b = 0; b < x.batch(); ++b) {
    for (size_t i = 0; i < channels.size(); ++i) {
      std::ranges::copy(x.plane(b, channels[i]), out.plane(b, static_cast<int64_t>(i)).begin());
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kB0: return "B0";
    case Variant::kB1: return "B1";
    case Variant::kB2: return "B2";
    case Variant::kB3: return "B3";
    case Variant::kB4: return "B4";
    case Variant::kCustom: return "custom";
  }
  return "custom";
}

Variant parse_variant(std::string_view s) {
  for (auto v : {Variant::kB0, Variant::kB1, Variant::kB2, Variant::kB3, Variant::kB4, Variant::kCustom}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("variant", "expected B0..B4 or custom, got \"" + std::string(s) + "\"");
}

BackboneConfig BackboneConfig::preset(Variant v) {
  BackboneConfig c;
  c.variant = v;
  switch (v) {
    case Variant::kB0:
      c.widths = {32, 64, 160, 256};
      break;
    case Variant::kB1:
    case Variant::kCustom:
      break;
    case Variant::kB2:
      c.depths = {3, 4, 6, 3};
      break;
    case Variant::kB3:
      c.depths = {3, 4, 18, 3};
      break;
    case Variant::kB4:
      c.depths = {3, 8, 27, 3};
      break;
  }
  return c;
}

void BackboneConfig::validate() const {
  for (size_t i = 0; i < 4; ++i) {
    const std::string stage = "stage " + std::to_string(i + 1);
    if (widths[i] < 1) throw ConfigError("backbone.widths", stage + " width must be positive");
    if (depths[i] < 1) throw ConfigError("backbone.depths", stage + " depth must be positive");
    if (heads[i] < 1 || widths[i] % heads[i] != 0) {
      throw ConfigError("backbone.heads", stage + " width " + std::to_string(widths[i]) +
                                              " not divisible by heads " + std::to_string(heads[i]));
    }
    if (sr_ratios[i] < 1) throw ConfigError("backbone.sr_ratios", stage + " reduction must be >= 1");
  }
  if (ffn_expansion < 1) throw ConfigError("backbone.ffn_expansion", "must be >= 1");
}

Modalities Modalities::parse(std::string_view s) {
  Modalities m{false, false, false};
  for (char ch : s) {
    bool* slot = ch == 'R' ? &m.rgb : ch == 'T' ? &m.thermal : ch == 'E' ? &m.event : nullptr;
    if (!slot) throw ConfigError("modalities", "unknown modality '" + std::string(1, ch) + "' (use R, T, E)");
    if (*slot) throw ConfigError("modalities", "duplicate modality '" + std::string(1, ch) + "'");
    *slot = true;
  }
  if (!m.rgb && !m.thermal && !m.event) throw ConfigError("modalities", "at least one modality is required");
  return m;
}

std::string Modalities::str() const {
  std::string s;
  if (rgb) s += 'R';
  if (thermal) s += 'T';
  if (event) s += 'E';
  return s;
}

StreamLayout stream_layout(Modalities m) {
  StreamLayout l;
  if (m.rgb) {
    l.a = {0, 1, 2};
    if (m.thermal) l.b.push_back(3);
    if (m.event) l.b.push_back(4);
  } else {
    if (m.thermal) l.a.push_back(3);
    if (m.event) l.b.push_back(4);
  }
  if (l.a.empty() || l.b.empty()) {
    throw ConfigError("modalities", "\"" + m.str() + "\" leaves a stream empty; dual-stream needs two modalities");
  }
  return l;
}

StreamSplit split_streams(const Tensor4& x, Modalities m) {
  if (x.channels() != 5) throw ShapeError("split_streams: expected 5 channels, got " + std::to_string(x.channels()));
  const auto layout = stream_layout(m);
  return {select_channels(x, layout.a), select_channels(x, layout.b), m};
}

PatchTokens patch_embed(const Tensor4& x, int stage, const ParamStore& params, const std::string& prefix) {
  if (stage < 1 || stage > 4) throw ConfigError("stage", "must be 1..4, got " + std::to_string(stage));
  const int k = stage == 1 ? 7 : 3;
  const int stride = stage == 1 ? 4 : 2;
  const int pad = k / 2;
  if (x.height() + 2 * pad < k || x.width() + 2 * pad < k) {
    throw ShapeError("patch_embed stage " + std::to_string(stage) + ": input " + x.shape().str() +
                     " smaller than padded kernel " + std::to_string(k));
  }
  const Tensor4 y = conv2d(x, params.at(prefix + "embed.proj.weight"), params.values(prefix + "embed.proj.bias"),
                           stride, pad, 1);
  return {norm(to_tokens(y), params, prefix + "embed.norm"), y.height(), y.width()};
}

TokenMatrix sra_attention(const TokenMatrix& t, int64_t h, int64_t w, int64_t heads, int64_t reduction_ratio,
                          const ParamStore& params, const std::string& prefix) {
  const int64_t c = t.channels();
  if (h * w != t.tokens()) throw ShapeError("sra_attention: N != H*W");
  if (heads < 1 || c % heads != 0) throw ShapeError("sra_attention: width not divisible by heads");
  const std::string p = prefix + "attn.";
  const TokenMatrix y = norm(t, params, prefix + "norm1");
  const TokenMatrix q = dense(y, params, p + "q");

  TokenMatrix kv_src = y;
  if (reduction_ratio > 1) {
    const int64_t r = reduction_ratio;
    Tensor4 grid = pad_bottom_right(to_map(y, h, w), (h + r - 1) / r * r, (w + r - 1) / r * r);
    grid = conv2d(grid, params.at(p + "sr.weight"), params.values(p + "sr.bias"), static_cast<int>(r), 0, 1);
    kv_src = norm(to_tokens(grid), params, p + "sr_norm");
  }
  const TokenMatrix kv = dense(kv_src, params, p + "kv");

  const int64_t dh = c / heads;
  const int64_t nq = t.tokens();
  const int64_t nk = kv_src.tokens();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  TokenMatrix attended(t.batch(), nq, c);
  for (int64_t b = 0; b < t.batch(); ++b) {
    for (int64_t hd = 0; hd < heads; ++hd) {
      Matrix qh(nq, dh), kh(nk, dh), vh(nk, dh);
      for (int64_t n = 0; n < nq; ++n) {
        for (int64_t d = 0; d < dh; ++d) qh.at(n, d) = q.at(b, n, hd * dh + d);
      }
      for (int64_t n = 0; n < nk; ++n) {
        for (int64_t d = 0; d < dh; ++d) {
          kh.at(n, d) = kv.at(b, n, hd * dh + d);
          vh.at(n, d) = kv.at(b, n, c + hd * dh + d);
        }
      }
      const Matrix o = attention(qh, kh, vh, scale);
      for (int64_t n = 0; n < nq; ++n) {
        for (int64_t d = 0; d < dh; ++d) attended.at(b, n, hd * dh + d) = o.at(n, d);
      }
    }
  }
  return add_tokens(t, dense(attended, params, p + "proj"));
}

TokenMatrix mix_ffn(const TokenMatrix& t, int64_t h, int64_t w, int64_t expansion, const ParamStore& params,
                    const std::string& prefix) {
  const std::string p = prefix + "ffn.";
  const auto& fc1 = params.at(p + "fc1.weight");
  if (fc1.shape[0] != expansion * t.channels()) {
    throw ShapeError("mix_ffn: hidden width " + std::to_string(fc1.shape[0]) + " != expansion * C");
  }
  const TokenMatrix hid = dense(norm(t, params, prefix + "norm2"), params, p + "fc1");
  Tensor4 grid = conv2d(to_map(hid, h, w), params.at(p + "dw.weight"), params.values(p + "dw.bias"), 1, 1,
                        static_cast<int>(hid.channels()));
  gelu_inplace(grid.data());
  return add_tokens(t, dense(to_tokens(grid), params, p + "fc2"));
}

Tensor4 run_stage(const Tensor4& input, int stage, const BackboneConfig& config, const ParamStore& params,
                  const std::string& stream_prefix) {
  const auto i = static_cast<size_t>(stage - 1);
  auto [tokens, h, w] = patch_embed(input, stage, params, stage_prefix(stream_prefix, stage));
  for (int64_t j = 0; j < config.depths[i]; ++j) {
    const std::string bp = block_prefix(stream_prefix, stage, j);
    tokens = sra_attention(tokens, h, w, config.heads[i], config.sr_ratios[i], params, bp);
    tokens = mix_ffn(tokens, h, w, config.ffn_expansion, params, bp);
  }
  return to_map(norm(tokens, params, stage_prefix(stream_prefix, stage) + "norm"), h, w);
}

std::array<Tensor4, 4> forward_single(const Tensor4& input, const BackboneConfig& config, const ParamStore& params,
                                      const std::string& stream_prefix) {
  std::array<Tensor4, 4> out;
  Tensor4 x = input;
  for (int s = 1; s <= 4; ++s) {
    x = run_stage(x, s, config, params, stream_prefix);
    out[static_cast<size_t>(s - 1)] = x;
  }
  return out;
}

void declare_stream_params(ParamSpecList& specs, const std::string& prefix, const BackboneConfig& config,
                           int64_t in_channels) {
  int64_t cin = in_channels;
  for (int s = 1; s <= 4; ++s) {
    const auto i = static_cast<size_t>(s - 1);
    const int64_t c = config.widths[i];
    const std::string sp = stage_prefix(prefix, s);
    specs.conv(sp + "embed.proj", cin, c, s == 1 ? 7 : 3);
    specs.norm(sp + "embed.norm", c);
    const int64_t hid = c * config.ffn_expansion;
    for (int64_t j = 0; j < config.depths[i]; ++j) {
      const std::string bp = block_prefix(prefix, s, j);
      specs.norm(bp + "norm1", c);
      specs.linear(bp + "attn.q", c, c);
      specs.linear(bp + "attn.kv", c, 2 * c);
      if (config.sr_ratios[i] > 1) {
        specs.conv(bp + "attn.sr", c, c, config.sr_ratios[i]);
        specs.norm(bp + "attn.sr_norm", c);
      }
      specs.linear(bp + "attn.proj", c, c);
      specs.norm(bp + "norm2", c);
      specs.linear(bp + "ffn.fc1", c, hid);
      specs.conv(bp + "ffn.dw", hid, hid, 3, hid);
      specs.linear(bp + "ffn.fc2", hid, c);
    }
    specs.norm(sp + "norm", c);
    cin = c;
  }
}

DualOutput forward_dual(const Tensor4& x, const BackboneConfig& config, Modalities modalities,
                        const FusionConfig& fusion, const ParamStore& params, const FusionOptions& options) {
  config.validate();
  fusion.validate(config.widths);
  auto split = split_streams(x, modalities);

  DualOutput out;
  Tensor4 in_a = std::move(split.rgb);
  Tensor4 in_b = std::move(split.aux);
  for (int s = 1; s <= 4; ++s) {
    const auto i = static_cast<size_t>(s - 1);
    Tensor4 a = run_stage(in_a, s, config, params, kStreamA);
    Tensor4 b = run_stage(in_b, s, config, params, kStreamB);
    StageFeature& f = out.stages[i];
    f.stage = s;
    f.stride = kStageStrides[i];
    f.width = config.widths[i];
    if (fusion.fuses_at(s)) {
      FusionDiagnostics diag;
      f.map = fuse(fusion, s, a, b, params, options, &diag);
      out.diagnostics.push_back(std::move(diag));
      in_a = f.map;
      in_b = f.map;
    } else {
      f.map = mean_of(a, b);
      in_a = a;
      in_b = b;
    }
    out.stream_a[i] = std::move(a);
    out.stream_b[i] = std::move(b);
  }
  return out;
}

}  // namespace trifuse
