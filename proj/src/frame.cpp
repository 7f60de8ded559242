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
#include "trifuse/frame.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trifuse/errors.hpp"
#include "trifuse/npy.hpp"

namespace trifuse {

std::string_view to_string(DayNight d) { return d == DayNight::kDay ? "day" : "night"; }

DayNight parse_day_night(std::string_view s) {
  if (s == "day") return DayNight::kDay;
  if (s == "night") return DayNight::kNight;
  throw FormatError("day_night must be \"day\" or \"night\", got \"" + std::string(s) + "\"");
}

PixelBox to_pixels(const GroundTruthBox& box, int64_t image_h, int64_t image_w) {
  const double cx = box.cx * static_cast<double>(image_w);
  const double cy = box.cy * static_cast<double>(image_h);
  const double w = box.w * static_cast<double>(image_w);
  const double h = box.h * static_cast<double>(image_h);
  return {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
}

GroundTruthBox from_pixels(const PixelBox& box, int64_t image_h, int64_t image_w, int class_id) {
  const auto W = static_cast<double>(image_w);
  const auto H = static_cast<double>(image_h);
  return {class_id, (box.x1 + box.x2) / 2.0 / W, (box.y1 + box.y2) / 2.0 / H, (box.x2 - box.x1) / W,
          (box.y2 - box.y1) / H};
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<GroundTruthBox> parse_labels(std::string_view text, const std::string& source) {
  std::vector<GroundTruthBox> boxes;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (tok.size() != 5) {
      throw FormatError(where + ": expected 5 fields `class cx cy w h`, got " + std::to_string(tok.size()));
    }
    double vals[5];
    for (int i = 0; i < 5; ++i) {
      if (!parse_double(tok[static_cast<size_t>(i)], vals[i])) {
        throw FormatError(where + ": field " + std::to_string(i + 1) + " is not a number: " +
                          tok[static_cast<size_t>(i)]);
      }
    }
    if (vals[0] != static_cast<int>(vals[0])) throw FormatError(where + ": class id must be an integer");
    GroundTruthBox box{static_cast<int>(vals[0]), vals[1], vals[2], vals[3], vals[4]};
    const std::string name = "box " + std::to_string(boxes.size()) + " (" + where + ")";
    if (box.class_id != 0) throw ValidationError(name + ": class id " + std::to_string(box.class_id) + " != 0");
    auto check_unit = [&](const char* field, double v) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(name + ": " + field + "=" + std::to_string(v) + " outside [0,1]");
      }
    };
    check_unit("cx", box.cx);
    check_unit("cy", box.cy);
    check_unit("w", box.w);
    check_unit("h", box.h);
    if (!(box.w > 0.0)) throw ValidationError(name + ": w must be > 0");
    if (!(box.h > 0.0)) throw ValidationError(name + ": h must be > 0");
    boxes.push_back(box);
  }
  return boxes;
}

std::vector<GroundTruthBox> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open label file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_labels(ss.str(), path.string());
}

std::string format_labels(const std::vector<GroundTruthBox>& boxes) {
  std::string out;
  char buf[128];
  for (const auto& b : boxes) {
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f\n", b.class_id, b.cx, b.cy, b.w, b.h);
    out += buf;
  }
  return out;
}

Tensor4 frame_tensor_from_hwc(const std::vector<int64_t>& shape, std::span<const float> hwc,
                              const std::string& source) {
  if (shape.size() != 3) {
    throw FormatError(source + ": expected rank-3 H x W x 5 array, got rank " + std::to_string(shape.size()));
  }
  if (shape[2] != kChannelsPerFrame) {
    throw FormatError(source + ": expected 5 channels, got " + std::to_string(shape[2]));
  }
  const int64_t h = shape[0];
  const int64_t w = shape[1];
  Tensor4 x(1, kChannelsPerFrame, h, w);
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t xx = 0; xx < w; ++xx) {
      for (int64_t c = 0; c < kChannelsPerFrame; ++c) {
        x.at(0, c, y, xx) = hwc[static_cast<size_t>((y * w + xx) * kChannelsPerFrame + c)];
      }
    }
  }
  return x;
}

std::vector<float> frame_tensor_to_hwc(const Tensor4& x) {
  const auto& s = x.shape();
  std::vector<float> out(static_cast<size_t>(s.h * s.w * s.c));
  for (int64_t y = 0; y < s.h; ++y) {
    for (int64_t xx = 0; xx < s.w; ++xx) {
      for (int64_t c = 0; c < s.c; ++c) out[static_cast<size_t>((y * s.w + xx) * s.c + c)] = x.at(0, c, y, xx);
    }
  }
  return out;
}

TriModalFrame load_frame(const std::filesystem::path& array_path, const std::filesystem::path& label_path) {
  const auto arr = npy::read(array_path);
  TriModalFrame f;
  f.pixels = frame_tensor_from_hwc(arr.shape, arr.to_float(), array_path.string());
  f.boxes = read_labels(label_path);
  f.meta.frame_id = array_path.stem().string();
  return f;
}

}  // namespace trifuse
