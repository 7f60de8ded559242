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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "trifuse/tensor.hpp"

namespace trifuse {

/// Channel layout of a stored sample.
inline constexpr int kChannelsPerFrame = 5;
inline constexpr int kThermalChannel = 3;
inline constexpr int kEventChannel = 4;

enum class DayNight { kDay, kNight };

std::string_view to_string(DayNight d);
DayNight parse_day_night(std::string_view s);

/// Normalised center-format box (YOLO convention).
struct GroundTruthBox {
  int class_id = 0;
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Corner-format pixel box.
struct PixelBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

PixelBox to_pixels(const GroundTruthBox& box, int64_t image_h, int64_t image_w);
GroundTruthBox from_pixels(const PixelBox& box, int64_t image_h, int64_t image_w, int class_id = 0);

struct FrameMeta {
  std::string frame_id;
  DayNight day_night = DayNight::kDay;
  double timestamp = 0.0;  // seconds
};

struct TriModalFrame {
  Tensor4 pixels;  // (1, 5, H, W)
  std::vector<GroundTruthBox> boxes;
  FrameMeta meta;
};

/// Parses YOLO label text. `source` names the file in diagnostics.
std::vector<GroundTruthBox> parse_labels(std::string_view text, const std::string& source = "labels");
std::vector<GroundTruthBox> read_labels(const std::filesystem::path& path);
std::string format_labels(const std::vector<GroundTruthBox>& boxes);

/// Converts an H x W x 5 array into a (1, 5, H, W) tensor.
Tensor4 frame_tensor_from_hwc(const std::vector<int64_t>& shape, std::span<const float> hwc,
                              const std::string& source = "array");
/// Inverse of frame_tensor_from_hwc for batch 1.
std::vector<float> frame_tensor_to_hwc(const Tensor4& x);

TriModalFrame load_frame(const std::filesystem::path& array_path,
                         const std::filesystem::path& label_path);

}  // namespace trifuse
