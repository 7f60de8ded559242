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
#include "trifuse/model.hpp"

#include "trifuse/errors.hpp"

namespace trifuse {

void ModelConfig::validate() const {
  backbone.validate();
  fusion.validate(backbone.widths);
  stream_layout(modalities);
}

namespace {

ParamSpecList fusion_specs(const ModelConfig& config) {
  ParamSpecList specs;
  for (int s = 1; s <= 4; ++s) {
    if (config.fusion.fuses_at(s)) {
      declare_fusion_params(specs, config.fusion, s, config.backbone.widths[static_cast<size_t>(s - 1)]);
    }
  }
  return specs;
}

}  // namespace

ParamSpecList model_param_specs(const ModelConfig& config) {
  config.validate();
  const auto layout = stream_layout(config.modalities);
  ParamSpecList specs;
  declare_stream_params(specs, kStreamA, config.backbone, static_cast<int64_t>(layout.a.size()));
  declare_stream_params(specs, kStreamB, config.backbone, static_cast<int64_t>(layout.b.size()));
  specs.append(fusion_specs(config));
  if (config.with_neck) declare_neck_params(specs, config.backbone.widths);
  return specs;
}

ParamStore init_params(const ModelConfig& config, uint64_t seed) {
  return ParamStore::build(model_param_specs(config), seed);
}

ParamCount count_params(const ModelConfig& config) {
  config.validate();
  const auto layout = stream_layout(config.modalities);
  ParamCount n;
  ParamSpecList a, b, neck;
  declare_stream_params(a, kStreamA, config.backbone, static_cast<int64_t>(layout.a.size()));
  declare_stream_params(b, kStreamB, config.backbone, static_cast<int64_t>(layout.b.size()));
  n.stream_a = a.total();
  n.stream_b = b.total();
  n.fusion = fusion_specs(config).total();
  if (config.with_neck) {
    declare_neck_params(neck, config.backbone.widths);
    n.neck = neck.total();
  }
  return n;
}

ModelOutput run_model(const ModelConfig& config, const ParamStore& params, const Tensor4& x,
                      const FusionOptions& options) {
  if (x.height() % 32 != 0 || x.width() % 32 != 0) {
    throw ShapeError("run_model: input " + x.shape().str() + " must be padded to multiples of 32");
  }
  ModelOutput out;
  out.backbone = forward_dual(x, config.backbone, config.modalities, config.fusion, params, options);
  if (config.with_neck) out.pyramid = fpn(out.backbone.stages, params);
  return out;
}

}  // namespace trifuse
