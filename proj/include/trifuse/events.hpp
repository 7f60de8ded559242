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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "trifuse/tensor.hpp"

namespace trifuse {

/// One polarity event; `t` in microseconds, polarity +1 (ON) or -1 (OFF).
struct Event {
  int64_t t = 0;
  int32_t x = 0;
  int32_t y = 0;
  int8_t polarity = 1;
};

/// Default binning window: one 30 FPS frame interval.
inline constexpr double kDefaultEventWindow = 1.0 / 30.0;

class EventStream {
 public:
  EventStream(int64_t height, int64_t width);
  /// Validates ordering and bounds; errors name the first offending index.
  EventStream(int64_t height, int64_t width, std::vector<Event> events);

  int64_t height() const { return height_; }
  int64_t width() const { return width_; }
  const std::vector<Event>& events() const { return events_; }
  size_t size() const { return events_.size(); }

  /// Same stream with every polarity flipped.
  EventStream inverted() const;

 private:
  int64_t height_;
  int64_t width_;
  std::vector<Event> events_;
};

/// True iff an event at `t_us` falls in [center - delta/2, center + delta/2).
bool in_window(int64_t t_us, double center_t, double delta_t);

/// Signed ON-minus-OFF count per pixel over the window, scaled by the
/// window's maximum absolute count into [-1, 1] (all zeros if empty).
/// Returns a (height, width) matrix.
Matrix bin_events(const EventStream& stream, double center_t, double delta_t = kDefaultEventWindow);

/// Text format: one `t_us x y polarity` line per event, polarity in
/// {1, -1, 0} with 0 read as OFF. Blank lines and `#` comments are skipped.
EventStream read_event_file(const std::filesystem::path& path, int64_t height, int64_t width);
void write_event_file(const std::filesystem::path& path, const EventStream& stream);

/// One timestamp (seconds) per line.
std::vector<double> read_timestamps(const std::filesystem::path& path);

}  // namespace trifuse
