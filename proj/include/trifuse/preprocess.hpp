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
#include <vector>

#include "trifuse/manifest.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

/// Range the stored RGB values live in; ImageNet statistics are scaled to it.
enum class PixelScale { kUnit, kByte };

PixelScale parse_pixel_scale(const std::string& s);
std::string_view to_string(PixelScale s);

/// Floor applied to a channel's standard deviation.
inline constexpr double kStdFloor = 1e-6;

/// Per-channel affine statistics for the five input channels.
class NormStats {
 public:
  /// Throws ValidationError if any std is not strictly positive.
  NormStats(std::array<double, 5> mean, std::array<double, 5> std);

  /// ImageNet RGB statistics with identity (mean 0, std 1) thermal/event.
  static NormStats imagenet(PixelScale scale = PixelScale::kUnit);
  static NormStats identity();

  const std::array<double, 5>& mean() const { return mean_; }
  const std::array<double, 5>& std() const { return std_; }

 private:
  std::array<double, 5> mean_;
  std::array<double, 5> std_;
};

/// out[c] = (in[c] - mean[c]) / std[c] for a (B, 5, H, W) tensor.
Tensor4 normalize(const Tensor4& x, const NormStats& stats);
Tensor4 denormalize(const Tensor4& x, const NormStats& stats);

/// Population mean/std of the requested channels (a subset of {3, 4}) over
/// all pixels of all frames; remaining channels keep ImageNet/identity
/// statistics. Degenerate std is clamped to kStdFloor.
NormStats compute_stats(const std::vector<Tensor4>& frames, const std::vector<int>& channels,
                        PixelScale scale = PixelScale::kUnit);
NormStats compute_stats(const DatasetManifest& manifest, const std::vector<int>& channels,
                        PixelScale scale = PixelScale::kUnit);

struct PaddedTensor {
  Tensor4 tensor;
  int64_t original_h = 0;
  int64_t original_w = 0;
};

int64_t round_up(int64_t v, int64_t multiple);

/// Zero-pads bottom/right so H and W are multiples of `stride`.
PaddedTensor pad_to_stride(const Tensor4& x, int64_t stride = 32);

}  // namespace trifuse
