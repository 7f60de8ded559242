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

// Stage-wise cross-modal fusion operators. Every operator maps two aligned
// (B, C, H, W) maps to one (B, C, H, W) map, so any of them can be plugged
// into any backbone stage without changing downstream shapes.
//
//   mage_bite  gated cross-stream residual exchange, then token exchange
//   mage_only  gated exchange, then a 1x1 2C -> C merge
//   bite_only  token exchange on the raw streams
//   cssa       threshold channel switching + learned spatial blend
//   gaff       per-stream SE, directional guidance injection, 1x1 merge

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trifuse/params.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

enum class Mechanism { kMageBite, kMageOnly, kBiteOnly, kCssa, kGaff, kNone };
enum class Guidance { kShared, kSeparate };
enum class Merge { kDirect, kBottleneck };

std::string_view to_string(Mechanism m);
std::string_view to_string(Guidance g);
std::string_view to_string(Merge m);
Mechanism parse_mechanism(std::string_view s);
Guidance parse_guidance(std::string_view s);
Merge parse_merge(std::string_view s);

/// Subset of the four backbone stages, written "s1234", "s4", or "none".
class StageSet {
 public:
  StageSet() = default;
  static StageSet parse(std::string_view s);
  static StageSet of(std::initializer_list<int> stages);
  static StageSet all() { return of({1, 2, 3, 4}); }
  /// All 16 subsets in bitmask order (empty set first).
  static std::vector<StageSet> every_subset();

  bool contains(int stage) const { return stage >= 1 && stage <= 4 && bits_[static_cast<size_t>(stage - 1)]; }
  bool empty() const;
  std::string str() const;
  bool operator==(const StageSet&) const = default;

 private:
  std::array<bool, 4> bits_{};
};

struct FusionConfig {
  Mechanism mechanism = Mechanism::kMageBite;
  StageSet stages = StageSet::all();
  double tau = 0.5;           // cssa
  int se_ratio = 4;           // gaff
  Guidance guidance = Guidance::kSeparate;  // gaff
  Merge merge = Merge::kDirect;             // gaff

  /// True when the mechanism actually fuses at `stage`.
  bool fuses_at(int stage) const { return mechanism != Mechanism::kNone && stages.contains(stage); }
  /// Rejects invalid hyperparameters or widths incompatible with the
  /// mechanism (ConfigError). `widths` are the four stage widths.
  void validate(const std::array<int64_t, 4>& widths) const;
};

/// MAGE gates: channel gates (B, C, 1, 1) and spatial gates (B, 1, H, W).
struct GatePack {
  Tensor4 channel_te_to_rgb;
  Tensor4 channel_rgb_to_te;
  Tensor4 spatial_te_to_rgb;
  Tensor4 spatial_rgb_to_te;
};

/// Forces gate values after the sigmoid. For MAGE `channel`/`spatial` set
/// the channel/spatial gates; for CSSA they set channel scores / blend mask;
/// for GAFF they set SE excitation / guidance maps.
struct GateOverride {
  std::optional<float> channel;
  std::optional<float> spatial;
};

/// Deliberate defects used to check that the property suites catch them.
struct FaultInjection {
  bool ignore_gate_override = false;
};

struct FusionOptions {
  GateOverride gates;
  FaultInjection faults;
};

/// Summary statistics of one fusion invocation (gate means, swap fractions).
struct FusionDiagnostics {
  int stage = 0;
  std::string mechanism;
  std::map<std::string, double> stats;
};

std::string fusion_prefix(int stage);

/// Declares the parameters of the fusion block at `stage` of width C.
void declare_fusion_params(ParamSpecList& specs, const FusionConfig& config, int stage, int64_t width);

struct MageOutput {
  Tensor4 rgb;
  Tensor4 te;
  GatePack gates;
};

/// Gated exchange: x_rgb' = x_rgb + ws_te->rgb * (wc_te->rgb * x_te) and
/// symmetrically; identity paths are untouched.
MageOutput mage(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                const std::string& prefix, const FusionOptions& options = {});

/// Symmetric residual cross-attention followed by depthwise 3x3 and a 1x1
/// 2C -> C projection. `prefix` points at the block (e.g. "fusion.s1.").
/// Residual cross-attention only: (B, H*W, 2C) tokens [T_a + A_ab ; T_b + A_ba].
TokenMatrix bite_exchange(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                          const std::string& prefix);
Tensor4 bite(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params, const std::string& prefix);

Tensor4 mage_bite(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                  const std::string& prefix, const FusionOptions& options = {},
                  FusionDiagnostics* diag = nullptr);
Tensor4 mage_only(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                  const std::string& prefix, const FusionOptions& options = {},
                  FusionDiagnostics* diag = nullptr);
Tensor4 bite_only(const Tensor4& x_rgb, const Tensor4& x_te, const ParamStore& params,
                  const std::string& prefix);

/// Channels with score < tau are taken from the other stream.
std::vector<bool> swap_mask(std::span<const float> scores, double tau);
/// Applies swap_mask per batch row of `scores` (B, C).
Tensor4 switch_channels(const Tensor4& self, const Tensor4& other, const Matrix& scores, double tau);
/// sigmoid(conv1d_k3(global_avg_pool(x))) per stream, shape (B, C).
Matrix cssa_scores(const Tensor4& x, const Param& kernel);

Tensor4 cssa(const Tensor4& x_a, const Tensor4& x_b, double tau, const ParamStore& params,
             const std::string& prefix, const FusionOptions& options = {}, FusionDiagnostics* diag = nullptr);

Tensor4 gaff(const Tensor4& x_a, const Tensor4& x_b, int se_ratio, Guidance guidance, Merge merge,
             const ParamStore& params, const std::string& prefix, const FusionOptions& options = {},
             FusionDiagnostics* diag = nullptr);

/// Dispatches to the configured mechanism for `stage`.
Tensor4 fuse(const FusionConfig& config, int stage, const Tensor4& x_a, const Tensor4& x_b,
             const ParamStore& params, const FusionOptions& options = {}, FusionDiagnostics* diag = nullptr);

}  // namespace trifuse
