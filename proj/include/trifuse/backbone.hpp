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

// Dual-stream four-stage Mix-Transformer encoder. Each stream owns its
// weights; at stages selected by the FusionConfig the two stage outputs are
// replaced by one fused map that then feeds both streams' next stage.

#include <array>
#include <string>
#include <vector>

#include "trifuse/fusion.hpp"
#include "trifuse/params.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

enum class Variant { kB0, kB1, kB2, kB3, kB4, kCustom };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct BackboneConfig {
  Variant variant = Variant::kB1;
  std::array<int64_t, 4> widths{64, 128, 320, 512};
  std::array<int64_t, 4> depths{2, 2, 2, 2};
  std::array<int64_t, 4> heads{1, 2, 5, 8};
  std::array<int64_t, 4> sr_ratios{8, 4, 2, 1};
  int64_t ffn_expansion = 4;

  /// Mix-Transformer family settings for B0..B4.
  static BackboneConfig preset(Variant v);
  void validate() const;
};

/// Per-stage stride of the encoder.
inline constexpr std::array<int, 4> kStageStrides{4, 8, 16, 32};

/// Active input modalities: RGB (channels 0-2), thermal (3), event (4).
struct Modalities {
  bool rgb = true;
  bool thermal = true;
  bool event = true;

  static Modalities parse(std::string_view s);  // e.g. "RTE", "RT", "TE", "RE"
  std::string str() const;
  bool operator==(const Modalities&) const = default;
};

/// Input channel indices fed to each of the two streams.
struct StreamLayout {
  std::vector<int> a;
  std::vector<int> b;
};

/// RGB -> stream A with the remaining modalities in stream B; for
/// thermal+event, thermal -> A and event -> B. ConfigError if either
/// stream would be empty.
StreamLayout stream_layout(Modalities m);

struct StreamSplit {
  Tensor4 rgb;  // stream A
  Tensor4 aux;  // stream B
  Modalities active;
};

StreamSplit split_streams(const Tensor4& x, Modalities m);

struct StageFeature {
  Tensor4 map;
  int stage = 0;
  int stride = 0;
  int64_t width = 0;
};

struct PatchTokens {
  TokenMatrix tokens;
  int64_t h = 0;
  int64_t w = 0;
};

/// Overlapping patch embedding: 7x7/s4 (pad 3) at stage 1, 3x3/s2 (pad 1)
/// otherwise, followed by LayerNorm. `prefix` names the stage, e.g.
/// "backbone.a.s1.".
PatchTokens patch_embed(const Tensor4& x, int stage, const ParamStore& params, const std::string& prefix);

/// Pre-norm spatial-reduction attention with residual. Keys/values come
/// from an R x R / stride R convolution over the zero-extended (ceil) grid.
/// `prefix` names the block, e.g. "backbone.a.s1.block0.".
TokenMatrix sra_attention(const TokenMatrix& t, int64_t h, int64_t w, int64_t heads, int64_t reduction_ratio,
                          const ParamStore& params, const std::string& prefix);

/// Pre-norm Mix-FFN with residual: fc1 -> depthwise 3x3 -> GELU -> fc2.
TokenMatrix mix_ffn(const TokenMatrix& t, int64_t h, int64_t w, int64_t expansion, const ParamStore& params,
                    const std::string& prefix);

/// One full encoder stage of one stream; returns the (B, C_s, H', W') map.
Tensor4 run_stage(const Tensor4& input, int stage, const BackboneConfig& config, const ParamStore& params,
                  const std::string& stream_prefix);

/// A single stream run end to end without any fusion.
std::array<Tensor4, 4> forward_single(const Tensor4& input, const BackboneConfig& config, const ParamStore& params,
                                      const std::string& stream_prefix);

inline const std::string kStreamA = "backbone.a.";
inline const std::string kStreamB = "backbone.b.";

void declare_stream_params(ParamSpecList& specs, const std::string& prefix, const BackboneConfig& config,
                           int64_t in_channels);

struct DualOutput {
  /// What the neck consumes: the fused map at fused stages, the mean of
  /// the two streams elsewhere.
  std::array<StageFeature, 4> stages;
  /// Per-stream stage outputs before any fusion at that stage.
  std::array<Tensor4, 4> stream_a;
  std::array<Tensor4, 4> stream_b;
  std::vector<FusionDiagnostics> diagnostics;
};

DualOutput forward_dual(const Tensor4& x, const BackboneConfig& config, Modalities modalities,
                        const FusionConfig& fusion, const ParamStore& params, const FusionOptions& options = {});

}  // namespace trifuse
