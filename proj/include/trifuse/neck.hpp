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

#include <array>
#include <string>

#include "trifuse/backbone.hpp"
#include "trifuse/params.hpp"

namespace trifuse {

inline constexpr int64_t kPyramidWidth = 256;
inline constexpr std::array<int, 5> kPyramidStrides{4, 8, 16, 32, 64};
/// Detector-head interface constants carried with the pyramid.
inline constexpr std::array<int, 5> kAnchorSizes{32, 64, 128, 256, 512};
inline constexpr std::array<double, 3> kAnchorRatios{0.5, 1.0, 2.0};

struct Pyramid {
  std::array<Tensor4, 5> levels;
  std::array<int, 5> strides = kPyramidStrides;
  std::array<int, 5> anchor_sizes = kAnchorSizes;
  std::array<double, 3> anchor_ratios = kAnchorRatios;
};

inline const std::string kNeckPrefix = "neck.";

void declare_neck_params(ParamSpecList& specs, const std::array<int64_t, 4>& stage_widths,
                         const std::string& prefix = kNeckPrefix);

/// Top-down FPN: 1x1 laterals to 256, nearest upsample + add, 3x3
/// smoothing, and a fifth level by stride-2 subsampling of the fourth.
Pyramid fpn(const std::array<StageFeature, 4>& features, const ParamStore& params,
            const std::string& prefix = kNeckPrefix);

}  // namespace trifuse
