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
#include <vector>

#include "trifuse/events.hpp"
#include "trifuse/frame.hpp"

namespace trifuse {

struct SynthSpec {
  int64_t frames = 4;
  int64_t height = 301;
  int64_t width = 391;
  int min_boxes = 1;
  int max_boxes = 4;
  int64_t min_size = 12;
  int64_t max_size = 80;
  double night_fraction = 0.5;
  double fps = 30.0;
  uint64_t seed = 0;

  void validate() const;
};

struct SynthFrame {
  Tensor4 pixels;                 // (1, 5, H, W), RGB in [0, 1]
  std::vector<PixelBox> boxes;    // integer-aligned generator rectangles
  DayNight day_night = DayNight::kDay;
  double timestamp = 0.0;
  EventStream events{1, 1};
};

/// Renders frame `index` of the corpus described by `spec`. Deterministic
/// in (spec, index).
SynthFrame render_frame(const SynthSpec& spec, int64_t index);

struct SynthOutput {
  std::filesystem::path manifest;
  std::vector<std::vector<PixelBox>> boxes;
};

/// Writes frames/*.npy (H x W x 5 float32), labels/*.txt (YOLO),
/// events/*.txt, timestamps.txt and manifest.json under `out_dir`.
SynthOutput cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace trifuse
