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
#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "trifuse/errors.hpp"
#include "trifuse/events.hpp"
#include "trifuse/frame.hpp"
#include "trifuse/manifest.hpp"
#include "trifuse/npy.hpp"
#include "trifuse/preprocess.hpp"

using namespace trifuse;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("trifuse_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::string npy_file(const std::string& header_dict, const std::string& payload) {
  std::string h = header_dict;
  while ((10 + h.size() + 1) % 64 != 0) h += ' ';
  h += '\n';
  std::string out = "\x93NUMPY";
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(h.size() & 0xff);
  out += static_cast<char>(h.size() >> 8);
  return out + h + payload;
}

}  // namespace

TEST_CASE("npy float32 write/read is bitwise identical") {
  std::mt19937_64 gen(1);
  const auto dir = scratch("npy");
  for (auto order : {npy::ByteOrder::kLittle, npy::ByteOrder::kBig}) {
    std::vector<float> v = oracle::random_vector(gen, 301 * 7 * 5, 100.0);
    v[0] = -0.0f;
    v[1] = std::numeric_limits<float>::infinity();
    v[2] = std::numeric_limits<float>::denorm_min();
    const auto a = npy::from_float({301, 7, 5}, v, order);
    npy::write(dir / "a.npy", a);
    const auto b = npy::read(dir / "a.npy");
    CHECK(b.shape == a.shape);
    CHECK(b.descr() == a.descr());
    const auto back = b.to_float();
    REQUIRE(back.size() == v.size());
    CHECK(std::memcmp(back.data(), v.data(), v.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("npy header is 64-byte aligned and newline terminated") {
  const auto a = npy::from_float({2, 3}, std::vector<float>(6, 1.0f));
  const auto bytes = npy::serialize(a);
  const size_t hlen = bytes[8] | (bytes[9] << 8);
  CHECK((10 + hlen) % 64 == 0);
  CHECK(bytes[10 + hlen - 1] == '\n');
  CHECK(a.descr() == "<f4");
}

TEST_CASE("npy reads other dtypes and rejects malformed files") {
  const std::string payload_i2("\x01\x00\xff\xff", 4);
  const auto i2 = npy::parse(bytes_of(npy_file("{'descr': '<i2', 'fortran_order': False, 'shape': (2,), }", payload_i2)));
  CHECK(i2.to_float() == std::vector<float>{1.0f, -1.0f});

  double d = 2.5;
  std::string payload_f8(8, '\0');
  std::memcpy(payload_f8.data(), &d, 8);
  const auto f8 = npy::parse(bytes_of(npy_file("{'descr': '<f8', 'fortran_order': False, 'shape': (1,), }", payload_f8)));
  CHECK(f8.to_double() == std::vector<double>{2.5});

  const auto u1 = npy::parse(bytes_of(npy_file("{'descr': '|u1', 'fortran_order': False, 'shape': (), }", "\x07")));
  CHECK(u1.shape.empty());
  CHECK(u1.to_float() == std::vector<float>{7.0f});

  CHECK_THROWS_AS(npy::parse(bytes_of("not an npy file")), FormatError);
  CHECK_THROWS_AS(npy::parse(bytes_of(npy_file("{'descr': '<f4', 'fortran_order': True, 'shape': (1,), }", "abcd"))),
                  FormatError);
  CHECK_THROWS_AS(npy::parse(bytes_of(npy_file("{'descr': '<c8', 'fortran_order': False, 'shape': (1,), }", "abcdefgh"))),
                  FormatError);
  CHECK_THROWS_AS(npy::parse(bytes_of(npy_file("{'descr': '<f4', 'fortran_order': False, 'shape': (3,), }", "abcd"))),
                  FormatError);
}

TEST_CASE("YOLO labels parse, validate and round trip") {
  const auto boxes = parse_labels("0 0.5 0.5 0.25 0.1\n\n0 0.1 0.2 0.05 0.05\n");
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[1].cy == doctest::Approx(0.2));
  CHECK(parse_labels(format_labels(boxes)).size() == 2);
  CHECK(parse_labels("").empty());

  CHECK_THROWS_WITH_AS(parse_labels("0 0.5 0.5 0.2 0.2\n0 0.5 abc 0.2 0.2\n", "f.txt"), doctest::Contains("f.txt:2"),
                       FormatError);
  CHECK_THROWS_AS(parse_labels("0 0.5 0.5 0.2\n"), FormatError);
  CHECK_THROWS_AS(parse_labels("0 1.5 0.5 0.2 0.2\n"), ValidationError);
  CHECK_THROWS_AS(parse_labels("0 0.5 0.5 0.0 0.2\n"), ValidationError);
  CHECK_THROWS_AS(parse_labels("1 0.5 0.5 0.2 0.2\n"), ValidationError);
}

TEST_CASE("pixel/normalized box conversion") {
  const PixelBox p{39.1, 30.1, 78.2, 90.3};
  const auto n = from_pixels(p, 301, 391);
  const auto back = to_pixels(n, 301, 391);
  CHECK(back.x1 == doctest::Approx(p.x1));
  CHECK(back.y2 == doctest::Approx(p.y2));
}

TEST_CASE("frame tensors convert from H x W x 5 and reject other layouts") {
  std::vector<float> hwc(3 * 4 * 5);
  for (size_t i = 0; i < hwc.size(); ++i) hwc[i] = static_cast<float>(i);
  const Tensor4 t = frame_tensor_from_hwc({3, 4, 5}, hwc);
  CHECK(t.shape() == Shape4{1, 5, 3, 4});
  CHECK(t.at(0, 4, 2, 3) == hwc[(2 * 4 + 3) * 5 + 4]);
  CHECK(frame_tensor_to_hwc(t) == hwc);
  CHECK_THROWS_AS(frame_tensor_from_hwc({3, 4, 4}, std::span<const float>(hwc.data(), 48)), FormatError);
  CHECK_THROWS_AS(frame_tensor_from_hwc({60}, hwc), FormatError);
}

TEST_CASE("event windows are half-open and centred") {
  CHECK(in_window(0, 0.0, 1.0 / 30.0));
  CHECK(in_window(-16666, 0.0, 1.0 / 30.0));
  CHECK_FALSE(in_window(16667, 0.0, 1.0 / 30.0));
  CHECK(in_window(1000000 - 499, 1.0, 1e-3));
  CHECK_FALSE(in_window(1000000 + 500, 1.0, 1e-3));
  CHECK(kDefaultEventWindow == 1.0 / 30.0);
}

TEST_CASE("bin_events matches the per-pixel oracle on 1000 events across 10 windows") {
  std::mt19937_64 gen(5);
  const int64_t h = 12, w = 17;
  const auto ev = oracle::random_events(gen, 1000, h, w, 400000);
  const EventStream s(h, w, ev);
  for (int k = 0; k < 10; ++k) {
    const double center = 0.02 + 0.035 * k;
    const Matrix got = bin_events(s, center);
    const auto want = oracle::bin_events(ev, h, w, center, kDefaultEventWindow);
    for (size_t i = 0; i < want.size(); ++i) CHECK(got.values()[i] == static_cast<float>(want[i]));
    const Matrix inv = bin_events(s.inverted(), center);
    for (size_t i = 0; i < want.size(); ++i) CHECK(inv.values()[i] == -got.values()[i]);
  }
}

TEST_CASE("bin_events edge cases") {
  const EventStream empty(3, 4);
  const Matrix z = bin_events(empty, 0.5);
  CHECK(z.rows() == 3);
  CHECK(std::ranges::all_of(z.values(), [](float v) { return v == 0.0f; }));

  const EventStream one(3, 4, {{500000, 2, 1, -1}});
  const Matrix m = bin_events(one, 0.5);
  CHECK(m.at(1, 2) == -1.0f);
  CHECK_THROWS_AS(bin_events(one, 0.5, 0.0), ValidationError);

  CHECK_THROWS_WITH_AS(EventStream(3, 4, {{10, 0, 0, 1}, {20, 0, 0, 1}, {15, 0, 0, 1}}), doctest::Contains("2"),
                       ValidationError);
  CHECK_THROWS_AS(EventStream(3, 4, {{10, 4, 0, 1}}), ValidationError);
  CHECK_THROWS_AS(EventStream(3, 4, {{10, 0, 0, 3}}), ValidationError);
}

TEST_CASE("event files round trip and accept 0 as OFF") {
  const auto dir = scratch("events");
  write_file(dir / "e.txt", "# t x y p\n100 1 2 1\n200 0 0 0\n\n300 3 1 -1\n");
  const auto s = read_event_file(dir / "e.txt", 3, 4);
  REQUIRE(s.size() == 3);
  CHECK(s.events()[1].polarity == -1);
  write_event_file(dir / "f.txt", s);
  const auto t = read_event_file(dir / "f.txt", 3, 4);
  CHECK(t.size() == 3);
  CHECK(t.events()[2].t == 300);
  write_file(dir / "bad.txt", "300 0 0 1\n100 0 0 1\n");
  CHECK_THROWS_WITH_AS(read_event_file(dir / "bad.txt", 3, 4), doctest::Contains("1"), ValidationError);
  write_file(dir / "ts.txt", "0.0\n0.0333\n");
  CHECK(read_timestamps(dir / "ts.txt").size() == 2);
}

TEST_CASE("manifest loads relative paths and filters by illumination") {
  const auto dir = scratch("manifest");
  fs::create_directories(dir / "f");
  for (int i = 0; i < 3; ++i) {
    npy::write(dir / "f" / (std::to_string(i) + ".npy"), npy::from_float({4, 6, 5}, std::vector<float>(120, i)));
    write_file(dir / "f" / (std::to_string(i) + ".txt"), "0 0.5 0.5 0.5 0.5\n");
  }
  write_file(dir / "m.json",
             R"([{"image": "f/0.npy", "labels": "f/0.txt", "day_night": "day"},
                 {"image": "f/1.npy", "labels": "f/1.txt", "day_night": "night"},
                 {"image": "f/2.npy", "labels": "f/2.txt", "day_night": "day", "split": "val"}])");
  const auto m = load_manifest(dir / "m.json");
  REQUIRE(m.size() == 3);
  CHECK(m.count(DayNight::kDay) == 2);
  CHECK(filter_split(m, SplitSelector::kNight).size() == 1);
  CHECK(filter_split(m, SplitSelector::kAll).size() == 3);
  const auto f = load_entry(m, 1);
  CHECK(f.meta.day_night == DayNight::kNight);
  CHECK(f.pixels.at(0, 2, 1, 1) == 1.0f);
  CHECK(f.boxes.size() == 1);

  save_manifest(dir / "copy.json", m);
  CHECK(load_manifest(dir / "copy.json").size() == 3);

  write_file(dir / "missing.json", R"([{"image": "f/9.npy", "labels": "f/0.txt", "day_night": "day"}])");
  CHECK_THROWS_AS(load_manifest(dir / "missing.json"), ValidationError);
  write_file(dir / "bad.json", R"({"image": 1})");
  CHECK_THROWS_AS(load_manifest(dir / "bad.json"), FormatError);
  CHECK(filter_split(filter_split(m, SplitSelector::kNight), SplitSelector::kDay).empty());
}

TEST_CASE("normalization statistics") {
  const auto unit = NormStats::imagenet(PixelScale::kUnit);
  const auto byte = NormStats::imagenet(PixelScale::kByte);
  CHECK(unit.mean()[0] == doctest::Approx(0.485));
  CHECK(byte.mean()[0] == doctest::Approx(0.485 * 255));
  CHECK(byte.std()[2] == doctest::Approx(0.225 * 255));
  CHECK(unit.mean()[3] == 0.0);
  CHECK(unit.std()[4] == 1.0);
  CHECK_THROWS_AS(NormStats({0, 0, 0, 0, 0}, {1, 1, 0, 1, 1}), ValidationError);

  std::mt19937_64 gen(9);
  const Tensor4 x = oracle::random_tensor(gen, 1, 5, 6, 7, 0.0, 1.0);
  const Tensor4 n = normalize(x, unit);
  CHECK(n.at(0, 1, 2, 3) == doctest::Approx((x.at(0, 1, 2, 3) - 0.456) / 0.224).epsilon(1e-6));
  CHECK(max_abs_diff(denormalize(n, unit).data(), x.data()) < 1e-6);
  CHECK_THROWS_AS(normalize(Tensor4(1, 4, 2, 2), unit), ShapeError);
}

TEST_CASE("compute_stats matches a two-pass population reference") {
  std::mt19937_64 gen(2);
  std::vector<Tensor4> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(oracle::random_tensor(gen, 1, 5, 4 + i, 5, -3.0, 7.0));
  const auto s = compute_stats(frames, {3, 4});
  for (int c : {3, 4}) {
    double sum = 0.0, n = 0.0;
    for (const auto& f : frames) {
      for (float v : f.plane(0, c)) {
        sum += v;
        n += 1;
      }
    }
    const double mu = sum / n;
    double var = 0.0;
    for (const auto& f : frames) {
      for (float v : f.plane(0, c)) var += (v - mu) * (v - mu);
    }
    CHECK(s.mean()[static_cast<size_t>(c)] == doctest::Approx(mu).epsilon(1e-12));
    CHECK(s.std()[static_cast<size_t>(c)] == doctest::Approx(std::sqrt(var / n)).epsilon(1e-12));
  }
  CHECK(s.mean()[0] == doctest::Approx(0.485));

  std::vector<Tensor4> flat{Tensor4(1, 5, 3, 3, 2.0f)};
  CHECK(compute_stats(flat, {3}).std()[3] == kStdFloor);
  CHECK_THROWS_AS(compute_stats(std::vector<Tensor4>{}, {3}), ValidationError);
}

TEST_CASE("pad_to_stride brings 301x391 to 320x416") {
  const Tensor4 x(1, 5, 301, 391, 1.0f);
  const auto p = pad_to_stride(x, 32);
  CHECK(p.tensor.shape() == Shape4{1, 5, 320, 416});
  CHECK(p.original_h == 301);
  CHECK(p.original_w == 391);
  CHECK(p.tensor.at(0, 0, 300, 390) == 1.0f);
  CHECK(p.tensor.at(0, 0, 301, 0) == 0.0f);
  CHECK(pad_to_stride(Tensor4(1, 5, 64, 32), 32).tensor.shape() == Shape4{1, 5, 64, 32});
  CHECK(round_up(301, 32) == 320);
}
