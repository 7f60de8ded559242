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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "trifuse/errors.hpp"
#include "trifuse/metrics.hpp"

using namespace trifuse;

TEST_CASE("IoU examples") {
  CHECK(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(iou({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
  CHECK(iou({0, 0, 1, 1}, {1, 1, 2, 2}) == 0.0);
  CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
  CHECK(iou({0, 0, 4, 4}, {1, 1, 3, 3}) == doctest::Approx(0.25));
  CHECK(box_area({1, 2, 4, 6}) == 12.0);
  CHECK_THROWS_AS(validate_box({2, 0, 1, 1}, "det"), ValidationError);
  CHECK_THROWS_AS(validate_box({0, 0, 0, 1}, "det"), ValidationError);
  CHECK_THROWS_AS(validate_box({0, 0, NAN, 1}, "det"), ValidationError);
}

TEST_CASE("IoU is symmetric and bounded") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = oracle::random_ap_fixture(seed, 6, 6);
    for (const auto& d : f.dets) {
      for (const auto& g : f.gts) {
        const double v = iou(d.box, g.box);
        CHECK(v == iou(g.box, d.box));
        CHECK((v >= 0.0 && v <= 1.0));
      }
    }
  }
}

TEST_CASE("IoU thresholds") {
  const auto t = iou_thresholds();
  CHECK(t[0] == 0.5);
  CHECK(t[9] == 0.95);
  CHECK(t[5] == 0.75);
}

TEST_CASE("trivial AP cases") {
  const std::vector<GroundTruth> one{{"a", {0, 0, 10, 10}, 0}};
  CHECK(average_precision({{"a", {0, 0, 10, 10}, 0.9, 0}}, one, 0.5).ap == 1.0);
  CHECK(average_precision({}, one, 0.5).ap == 0.0);
  CHECK(average_precision({}, one, 0.5).fn == 1);
  CHECK(average_precision({{"a", {20, 20, 30, 30}, 0.9, 0}}, one, 0.5).ap == 0.0);
  CHECK(average_precision({{"b", {0, 0, 10, 10}, 0.9, 0}}, one, 0.5).ap == 0.0);
  const auto empty = average_precision({{"a", {0, 0, 10, 10}, 0.9, 0}}, {}, 0.5);
  CHECK(empty.ap == 0.0);
  CHECK(empty.flagged);
}

TEST_CASE("hand-computed precision envelope") {
  const std::vector<GroundTruth> gts{{"a", {0, 0, 10, 10}, 0}, {"a", {20, 20, 30, 30}, 0}, {"b", {0, 0, 10, 10}, 0}};
  const std::vector<Detection> dets{{"a", {0, 0, 10, 10}, 0.9, 0},
                                    {"a", {50, 50, 60, 60}, 0.8, 0},
                                    {"b", {0, 0, 10, 10}, 0.7, 0},
                                    {"a", {0, 0, 10, 10}, 0.6, 0}};
  // Recall 1/3 at precision 1, 2/3 at precision 2/3: 34 points at 1, 33 at 2/3.
  const auto r = average_precision(dets, gts, 0.5);
  CHECK(r.ap == doctest::Approx(56.0 / 101.0).epsilon(1e-12));
  CHECK(r.tp == 2);
  CHECK(r.fp == 2);
  CHECK(r.fn == 1);
}

TEST_CASE("a duplicate prefers the unmatched ground truth with highest IoU") {
  const std::vector<GroundTruth> gts{{"a", {0, 0, 10, 10}, 0}, {"a", {2, 0, 12, 10}, 0}};
  const std::vector<Detection> dets{{"a", {1, 0, 11, 10}, 0.9, 0}, {"a", {2, 0, 12, 10}, 0.8, 0}};
  const auto r = average_precision(dets, gts, 0.5);
  CHECK(r.tp == 2);
  CHECK(r.ap == 1.0);
}

TEST_CASE("AP agrees with the staircase oracle on random fixtures") {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const auto f = oracle::random_ap_fixture(seed, 20, 20 + static_cast<int>(seed % 7));
    for (double thr : iou_thresholds()) {
      CHECK(average_precision(f.dets, f.gts, thr).ap ==
            doctest::Approx(oracle::average_precision(f.dets, f.gts, thr)).epsilon(1e-9));
    }
  }
}

TEST_CASE("AP invariants") {
  for (uint64_t seed = 100; seed < 130; ++seed) {
    auto f = oracle::random_ap_fixture(seed, 12, 15);
    const double base = average_precision(f.dets, f.gts, 0.5).ap;
    CHECK((base >= 0.0 && base <= 1.0));

    // Appending a detection scored below everything else cannot raise AP.
    auto more = f.dets;
    more.push_back({"f0", {200, 200, 210, 210}, 0.0, 0});
    CHECK(average_precision(more, f.gts, 0.5).ap <= base + 1e-12);

    // Reordering detections with distinct scores changes nothing.
    for (size_t i = 0; i < f.dets.size(); ++i) f.dets[i].score = 0.01 + 0.05 * static_cast<double>(i);
    const double distinct = average_precision(f.dets, f.gts, 0.5).ap;
    std::mt19937_64 gen(seed);
    std::shuffle(f.dets.begin(), f.dets.end(), gen);
    CHECK(average_precision(f.dets, f.gts, 0.5).ap == distinct);
  }
}

TEST_CASE("evaluate averages over thresholds") {
  GroundTruthSet gts;
  gts.add({"a", {0, 0, 10, 10}, 0});
  gts.add({"b", {0, 0, 20, 20}, 0});
  gts.add_image("c");
  std::vector<Detection> perfect{{"a", {0, 0, 10, 10}, 0.9, 0}, {"b", {0, 0, 20, 20}, 0.5, 0}};
  const auto r = evaluate(perfect, gts);
  CHECK(r.map == 1.0);
  CHECK(r.map50 == 1.0);
  CHECK(r.tp50 == 2);
  CHECK_FALSE(r.flagged);

  const auto none = evaluate({}, gts);
  CHECK(none.map == 0.0);
  CHECK(none.fn50 == 2);

  // Shifted by one pixel: IoU 9/11 passes up to 0.80 only.
  std::vector<Detection> shifted{{"a", {1, 0, 11, 10}, 0.9, 0}};
  const auto s = evaluate(shifted, gts);
  CHECK(s.ap[0] == doctest::Approx(51.0 / 101.0).epsilon(1e-12));
  CHECK(s.ap[6] == s.ap[0]);
  CHECK(s.ap[7] == 0.0);
  double mean = 0.0;
  for (double v : s.ap) mean += v;
  CHECK(s.map == doctest::Approx(mean / 10.0));

  CHECK_THROWS_AS(evaluate({{"zzz", {0, 0, 1, 1}, 0.5, 0}}, gts), ValidationError);
  GroundTruthSet empty_set;
  empty_set.add_image("a");
  const auto flagged = evaluate({{"a", {0, 0, 1, 1}, 0.5, 0}}, empty_set);
  CHECK(flagged.flagged);
  CHECK(flagged.map == 0.0);
}

TEST_CASE("JSONL parsing") {
  const auto dets = parse_detections(
      "{\"image_id\": \"a\", \"bbox\": [0, 0, 2, 2], \"score\": 0.5}\n"
      "\n"
      "{\"image_id\": 7, \"bbox\": [1, 1, 3, 4], \"score\": 1, \"class\": 0}\n",
      "d.jsonl");
  REQUIRE(dets.size() == 2);
  CHECK(dets[1].image_id == "7");
  CHECK(dets[1].box.y2 == 4.0);

  CHECK_THROWS_WITH_AS(parse_detections("{\"image_id\": \"a\"}\n{nope\n", "d.jsonl"), doctest::Contains("d.jsonl:1"),
                       FormatError);
  CHECK_THROWS_WITH_AS(parse_detections("{\"image_id\": \"a\", \"bbox\": [0,0,1,1], \"score\": 0.5}\n{nope\n", "d.jsonl"),
                       doctest::Contains("d.jsonl:2"), FormatError);
  CHECK_THROWS_AS(parse_detections("{\"image_id\": \"a\", \"bbox\": [0,0,1], \"score\": 0.5}", "d"), FormatError);
  CHECK_THROWS_AS(parse_detections("{\"image_id\": \"a\", \"bbox\": [0,0,1,1], \"score\": 1.5}", "d"),
                  ValidationError);
  CHECK_THROWS_AS(parse_detections("{\"image_id\": \"a\", \"bbox\": [0,0,1,1], \"score\": 0.5, \"class\": 2}", "d"),
                  ValidationError);
  CHECK_THROWS_AS(parse_detections("{\"image_id\": \"a\", \"bbox\": [3,0,1,1], \"score\": 0.5}", "d"),
                  ValidationError);

  const auto gts = parse_ground_truth(
      "{\"image_id\": \"a\", \"bbox\": [0, 0, 2, 2]}\n"
      "{\"image_id\": \"b\", \"bbox\": null}\n"
      "{\"image_id\": \"c\", \"bbox\": []}\n",
      "g.jsonl");
  CHECK(gts.images.size() == 3);
  CHECK(gts.boxes.size() == 1);

  const auto again = parse_ground_truth(format_ground_truth(gts), "round");
  CHECK(again.images == gts.images);
  CHECK(again.boxes.size() == 1);
  const auto d2 = parse_detections(format_detections(dets), "round");
  CHECK(d2[0].score == 0.5);
  CHECK(d2[1].image_id == "7");
}

TEST_CASE("reading detections from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "trifuse_metrics_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "g.jsonl") << "{\"image_id\": \"a\", \"bbox\": [0, 0, 4, 4]}\n";
  std::ofstream(dir / "d.jsonl") << "{\"image_id\": \"a\", \"bbox\": [0, 0, 4, 4], \"score\": 0.3}\n";
  const auto r = evaluate(read_detections(dir / "d.jsonl"), read_ground_truth(dir / "g.jsonl"));
  CHECK(r.map == 1.0);
  CHECK_THROWS(read_detections(dir / "missing.jsonl"));
  std::filesystem::remove_all(dir);
}
