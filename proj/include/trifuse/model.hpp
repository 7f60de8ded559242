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

#include "trifuse/backbone.hpp"
#include "trifuse/fusion.hpp"
#include "trifuse/neck.hpp"

namespace trifuse {

/// Everything that determines the parameter set of a model.
struct ModelConfig {
  BackboneConfig backbone = BackboneConfig::preset(Variant::kB1);
  FusionConfig fusion;
  Modalities modalities;
  bool with_neck = true;

  /// ConfigError on any inconsistency; runs before any allocation.
  void validate() const;
};

ParamSpecList model_param_specs(const ModelConfig& config);

/// Deterministic initialisation (truncated normal std 0.02 weights, zero
/// biases, unit norm scales).
ParamStore init_params(const ModelConfig& config, uint64_t seed);

struct ParamCount {
  int64_t stream_a = 0;
  int64_t stream_b = 0;
  int64_t fusion = 0;
  int64_t neck = 0;

  int64_t encoder() const { return stream_a + stream_b + fusion; }
  int64_t total() const { return encoder() + neck; }
};

/// Exact trainable-scalar count, by enumerating the declared parameters.
ParamCount count_params(const ModelConfig& config);

struct ModelOutput {
  DualOutput backbone;
  Pyramid pyramid;
};

/// Backbone + neck on a 5-channel input whose H, W are multiples of 32.
ModelOutput run_model(const ModelConfig& config, const ParamStore& params, const Tensor4& x,
                      const FusionOptions& options = {});

}  // namespace trifuse
