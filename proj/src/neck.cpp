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
#include "trifuse/neck.hpp"

#include "trifuse/errors.hpp"
#include "trifuse/kernels.hpp"

namespace trifuse {

void declare_neck_params(ParamSpecList& specs, const std::array<int64_t, 4>& stage_widths, const std::string& prefix) {
  for (size_t i = 0; i < 4; ++i) {
    specs.conv(prefix + "lateral" + std::to_string(i), stage_widths[i], kPyramidWidth, 1);
    specs.conv(prefix + "smooth" + std::to_string(i), kPyramidWidth, kPyramidWidth, 3);
  }
}

Pyramid fpn(const std::array<StageFeature, 4>& features, const ParamStore& params, const std::string& prefix) {
  for (size_t i = 0; i < 4; ++i) {
    const auto& f = features[i];
    if (f.stage != static_cast<int>(i) + 1 || f.stride != kStageStrides[i]) {
      throw ShapeError("fpn: level " + std::to_string(i) + " has stage " + std::to_string(f.stage) + " stride " +
                       std::to_string(f.stride) + ", expected stride " + std::to_string(kStageStrides[i]));
    }
    const auto& lat = params.at(prefix + "lateral" + std::to_string(i) + ".weight");
    if (f.map.channels() != lat.shape[1]) {
      throw ShapeError("fpn: stage " + std::to_string(i + 1) + " width " + std::to_string(f.map.channels()) +
                       " does not match lateral input " + std::to_string(lat.shape[1]));
    }
  }

  std::array<Tensor4, 4> inner;
  for (int i = 3; i >= 0; --i) {
    const std::string name = prefix + "lateral" + std::to_string(i);
    Tensor4 lat = conv2d(features[static_cast<size_t>(i)].map, params.at(name + ".weight"),
                         params.values(name + ".bias"), 1, 0, 1);
    if (i < 3) {
      const auto& top = inner[static_cast<size_t>(i + 1)];
      lat = add(lat, upsample_nearest(top, lat.height(), lat.width()));
    }
    inner[static_cast<size_t>(i)] = std::move(lat);
  }

  Pyramid pyr;
  for (size_t i = 0; i < 4; ++i) {
    const std::string name = prefix + "smooth" + std::to_string(i);
    pyr.levels[i] = conv2d(inner[i], params.at(name + ".weight"), params.values(name + ".bias"), 1, 1, 1);
  }
  pyr.levels[4] = max_pool2d(pyr.levels[3], 1, 2);
  return pyr;
}

}  // namespace trifuse
