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
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "trifuse/frame.hpp"

namespace trifuse {

struct Detection {
  std::string image_id;
  PixelBox box;
  double score = 0.0;
  int class_id = 0;
};

struct GroundTruth {
  std::string image_id;
  PixelBox box;
  int class_id = 0;
};

/// Ground truth plus the full image list, so images without boxes still count.
struct GroundTruthSet {
  std::set<std::string> images;
  std::vector<GroundTruth> boxes;

  void add_image(const std::string& image_id) { images.insert(image_id); }
  void add(const GroundTruth& gt);
};

inline constexpr int kRecallPoints = 101;
inline constexpr int kIouThresholds = 10;

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::array<double, kIouThresholds> iou_thresholds();

double box_area(const PixelBox& b);
double iou(const PixelBox& a, const PixelBox& b);

/// Throws ValidationError unless x2 > x1, y2 > y1 and all coordinates are finite.
void validate_box(const PixelBox& b, const std::string& what);

struct ApResult {
  double ap = 0.0;
  /// Set when there is no ground truth, in which case ap is defined as 0.
  bool flagged = false;
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
};

/// 101-point interpolated AP with greedy score-ordered matching. Score ties
/// keep input order. Detections on images without ground truth are false
/// positives.
ApResult average_precision(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                           double iou_thresh);

struct EvalReport {
  double map = 0.0;
  double map50 = 0.0;
  std::array<double, kIouThresholds> ap{};
  bool flagged = false;
  int64_t tp50 = 0;
  int64_t fp50 = 0;
  int64_t fn50 = 0;
};

/// ValidationError when a detection refers to an image absent from gts.
EvalReport evaluate(const std::vector<Detection>& dets, const GroundTruthSet& gts);

/// JSON lines: {"image_id", "bbox": [x1,y1,x2,y2], "score", "class"}.
/// Ground-truth records may carry "bbox": null or [] to declare an empty image.
std::vector<Detection> parse_detections(const std::string& text, const std::string& source);
GroundTruthSet parse_ground_truth(const std::string& text, const std::string& source);
std::vector<Detection> read_detections(const std::filesystem::path& path);
GroundTruthSet read_ground_truth(const std::filesystem::path& path);
std::string format_detections(const std::vector<Detection>& dets);
std::string format_ground_truth(const GroundTruthSet& gts);

}  // namespace trifuse
