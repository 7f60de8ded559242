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
#include "trifuse/events.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trifuse/errors.hpp"

namespace trifuse {

EventStream::EventStream(int64_t height, int64_t width) : height_(height), width_(width) {
  if (height < 1 || width < 1) throw ValidationError("event sensor size must be positive");
}

EventStream::EventStream(int64_t height, int64_t width, std::vector<Event> events)
    : EventStream(height, width) {
  for (size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0 && e.t < events[i - 1].t) {
      throw ValidationError("event " + std::to_string(i) + ": timestamp " + std::to_string(e.t) +
                            " precedes previous " + std::to_string(events[i - 1].t));
    }
    if (e.x < 0 || e.x >= width || e.y < 0 || e.y >= height) {
      throw ValidationError("event " + std::to_string(i) + ": (" + std::to_string(e.x) + "," +
                            std::to_string(e.y) + ") outside sensor " + std::to_string(height) + "x" +
                            std::to_string(width));
    }
    if (e.polarity != 1 && e.polarity != -1) {
      throw ValidationError("event " + std::to_string(i) + ": polarity must be +1 or -1");
    }
  }
  events_ = std::move(events);
}

EventStream EventStream::inverted() const {
  EventStream s(height_, width_);
  s.events_ = events_;
  for (auto& e : s.events_) e.polarity = static_cast<int8_t>(-e.polarity);
  return s;
}

bool in_window(int64_t t_us, double center_t, double delta_t) {
  const double t = static_cast<double>(t_us) * 1e-6;
  return t >= center_t - delta_t / 2.0 && t < center_t + delta_t / 2.0;
}

Matrix bin_events(const EventStream& stream, double center_t, double delta_t) {
  if (!(delta_t > 0.0)) throw ValidationError("bin_events: delta_t must be positive");
  Matrix frame(stream.height(), stream.width());
  const auto& ev = stream.events();
  // Events are time-ordered, so the window is a contiguous range.
  const double lo = center_t - delta_t / 2.0;
  auto first = std::partition_point(ev.begin(), ev.end(), [&](const Event& e) {
    return static_cast<double>(e.t) * 1e-6 < lo;
  });
  std::vector<int64_t> counts(static_cast<size_t>(stream.height() * stream.width()), 0);
  for (auto it = first; it != ev.end() && in_window(it->t, center_t, delta_t); ++it) {
    counts[static_cast<size_t>(it->y * stream.width() + it->x)] += it->polarity;
  }
  int64_t max_abs = 0;
  for (auto c : counts) max_abs = std::max(max_abs, c < 0 ? -c : c);
  if (max_abs == 0) return frame;
  auto out = frame.data();
  for (size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(counts[i]) / static_cast<double>(max_abs));
  }
  return frame;
}

EventStream read_event_file(const std::filesystem::path& path, int64_t height, int64_t width) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open event file " + path.string());
  std::vector<Event> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long long t, x, y, p;
    if (!(fields >> t)) continue;
    if (!(fields >> x >> y >> p)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected `t_us x y polarity`");
    }
    if (p != 1 && p != -1 && p != 0) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": polarity must be 1, -1 or 0");
    }
    events.push_back({t, static_cast<int32_t>(x), static_cast<int32_t>(y), static_cast<int8_t>(p == 1 ? 1 : -1)});
  }
  return EventStream(height, width, std::move(events));
}

void write_event_file(const std::filesystem::path& path, const EventStream& stream) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& e : stream.events()) {
    out << e.t << ' ' << e.x << ' ' << e.y << ' ' << static_cast<int>(e.polarity) << '\n';
  }
}

std::vector<double> read_timestamps(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open timestamp file " + path.string());
  std::vector<double> ts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string tok;
    if (!(fields >> tok) || tok[0] == '#') continue;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (*end != '\0') {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a timestamp: " + tok);
    }
    ts.push_back(v);
  }
  return ts;
}

}  // namespace trifuse
