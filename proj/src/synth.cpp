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
#include "trifuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "trifuse/errors.hpp"
#include "trifuse/manifest.hpp"
#include "trifuse/npy.hpp"
#include "trifuse/params.hpp"

namespace trifuse {

namespace fs = std::filesystem;

void SynthSpec::validate() const {
  if (frames < 0) throw ConfigError("frames", "must be >= 0");
  if (height < 8 || width < 8) throw ConfigError("geometry", "frames must be at least 8x8");
  if (min_boxes < 0 || max_boxes < min_boxes) throw ConfigError("boxes", "need 0 <= min_boxes <= max_boxes");
  if (min_size < 2 || max_size < min_size) throw ConfigError("box_size", "need 2 <= min_size <= max_size");
  if (max_size > std::min(height, width)) throw ConfigError("box_size", "max_size exceeds the frame");
  if (!(night_fraction >= 0.0 && night_fraction <= 1.0)) throw ConfigError("night_fraction", "must lie in [0,1]");
  if (!(fps > 0.0)) throw ConfigError("fps", "must be positive");
}

SynthFrame render_frame(const SynthSpec& spec, int64_t index) {
  std::mt19937_64 gen(splitmix64(spec.seed ^ splitmix64(static_cast<uint64_t>(index) + 1)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int64_t H = spec.height, W = spec.width;

  SynthFrame f;
  f.timestamp = static_cast<double>(index) / spec.fps;
  f.day_night = unit(gen) < spec.night_fraction ? DayNight::kNight : DayNight::kDay;
  const double light = f.day_night == DayNight::kDay ? 1.0 : 0.25;
  f.pixels = Tensor4(1, 5, H, W);

  const double bg_rgb = 0.3 + 0.2 * unit(gen);
  const double bg_th = 0.2 + 0.1 * unit(gen);
  for (int64_t c = 0; c < 3; ++c) {
    for (auto& v : f.pixels.plane(0, c)) v = static_cast<float>(light * (bg_rgb + 0.05 * unit(gen)));
  }
  for (auto& v : f.pixels.plane(0, kThermalChannel)) v = static_cast<float>(bg_th + 0.02 * unit(gen));

  std::uniform_int_distribution<int> nbox(spec.min_boxes, spec.max_boxes);
  std::uniform_int_distribution<int64_t> size(spec.min_size, spec.max_size);
  const int n = nbox(gen);
  std::vector<Event> events;
  const auto t_center = static_cast<int64_t>(std::llround(f.timestamp * 1e6));
  const auto half_window = static_cast<int64_t>(0.5e6 / spec.fps);
  std::uniform_int_distribution<int64_t> jitter(-half_window, half_window - 1);

  for (int k = 0; k < n; ++k) {
    const int64_t bw = size(gen), bh = size(gen);
    const int64_t x1 = std::uniform_int_distribution<int64_t>(0, W - bw)(gen);
    const int64_t y1 = std::uniform_int_distribution<int64_t>(0, H - bh)(gen);
    f.boxes.push_back(PixelBox{static_cast<double>(x1), static_cast<double>(y1), static_cast<double>(x1 + bw),
                               static_cast<double>(y1 + bh)});
    std::array<double, 3> color{unit(gen), unit(gen), unit(gen)};
    const double heat = 0.7 + 0.3 * unit(gen);
    for (int64_t y = y1; y < y1 + bh; ++y) {
      for (int64_t x = x1; x < x1 + bw; ++x) {
        for (int64_t c = 0; c < 3; ++c) f.pixels.at(0, c, y, x) = static_cast<float>(light * color[static_cast<size_t>(c)]);
        f.pixels.at(0, kThermalChannel, y, x) = static_cast<float>(heat);
      }
    }
    // Moving objects fire along their outline: ON on the leading edge, OFF on the trailing one.
    for (int64_t y = y1; y < y1 + bh; ++y) {
      events.push_back({t_center + jitter(gen), static_cast<int32_t>(x1 + bw - 1), static_cast<int32_t>(y), 1});
      events.push_back({t_center + jitter(gen), static_cast<int32_t>(x1), static_cast<int32_t>(y), -1});
    }
  }
  // Sparse sensor noise.
  const int64_t noise = (H * W) / 500;
  std::uniform_int_distribution<int32_t> px(0, static_cast<int32_t>(W - 1)), py(0, static_cast<int32_t>(H - 1));
  for (int64_t i = 0; i < noise; ++i) {
    events.push_back({t_center + jitter(gen), px(gen), py(gen), static_cast<int8_t>(unit(gen) < 0.5 ? 1 : -1)});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  f.events = EventStream(H, W, std::move(events));

  const Matrix binned = bin_events(f.events, f.timestamp, 1.0 / spec.fps);
  auto plane = f.pixels.plane(0, kEventChannel);
  for (int64_t y = 0; y < H; ++y) {
    for (int64_t x = 0; x < W; ++x) plane[static_cast<size_t>(y * W + x)] = static_cast<float>(binned.at(y, x));
  }
  return f;
}

SynthOutput cmd_synth(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  std::error_code ec;
  for (const char* sub : {"frames", "labels", "events"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw Error("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
  SynthOutput out;
  out.manifest = out_dir / "manifest.json";
  DatasetManifest manifest;
  std::ofstream stamps(out_dir / "timestamps.txt");
  if (!stamps) throw Error("cannot write " + (out_dir / "timestamps.txt").string());

  for (int64_t i = 0; i < spec.frames; ++i) {
    const SynthFrame f = render_frame(spec, i);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "frame_%06lld", static_cast<long long>(i));
    const fs::path npy_path = out_dir / "frames" / (std::string(stem) + ".npy");
    const fs::path label_path = out_dir / "labels" / (std::string(stem) + ".txt");

    const auto hwc = frame_tensor_to_hwc(f.pixels);
    npy::write(npy_path, npy::from_float({spec.height, spec.width, 5}, hwc));

    std::vector<GroundTruthBox> labels;
    for (const auto& b : f.boxes) labels.push_back(from_pixels(b, spec.height, spec.width));
    std::ofstream lf(label_path);
    if (!lf) throw Error("cannot write " + label_path.string());
    lf << format_labels(labels);

    write_event_file(out_dir / "events" / (std::string(stem) + ".txt"), f.events);
    char ts[64];
    std::snprintf(ts, sizeof(ts), "%.9f\n", f.timestamp);
    stamps << ts;

    manifest.entries.push_back(ManifestEntry{npy_path, label_path, f.day_night, "train"});
    out.boxes.push_back(f.boxes);
  }
  save_manifest(out.manifest, manifest);
  return out;
}

}  // namespace trifuse
