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
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "trifuse/errors.hpp"
#include "trifuse/model.hpp"
#include "trifuse/neck.hpp"

using namespace trifuse;

namespace {

const std::array<int64_t, 4> kWidths{4, 6, 8, 10};

std::array<StageFeature, 4> features(std::mt19937_64& gen, int64_t h, int64_t w) {
  std::array<StageFeature, 4> f;
  for (size_t i = 0; i < 4; ++i) {
    const int64_t s = kStageStrides[i];
    f[i].map = oracle::random_tensor(gen, 1, kWidths[i], (h + s - 1) / s, (w + s - 1) / s);
    f[i].stage = static_cast<int>(i) + 1;
    f[i].stride = kStageStrides[i];
    f[i].width = kWidths[i];
  }
  return f;
}

ParamStore neck_store(uint64_t seed) {
  ParamSpecList specs;
  declare_neck_params(specs, kWidths);
  auto p = ParamStore::build(specs, seed);
  std::mt19937_64 gen(seed);
  oracle::randomize(p, gen, 0.1);
  return p;
}

}  // namespace

TEST_CASE("neck parameter count") {
  ParamSpecList specs;
  declare_neck_params(specs, {64, 128, 320, 512});
  CHECK(specs.total() == oracle::neck_params({64, 128, 320, 512}));
  CHECK(specs.total() == 2623488);
}

TEST_CASE("top-down pathway matches a direct computation") {
  std::mt19937_64 gen(17);
  const auto f = features(gen, 40, 56);
  const auto p = neck_store(17);
  const Pyramid pyr = fpn(f, p);

  // Build the merged maps level by level in double, then smooth.
  std::array<std::vector<double>, 4> inner;
  std::array<std::array<int64_t, 2>, 4> dims;
  for (int i = 3; i >= 0; --i) {
    const auto ui = static_cast<size_t>(i);
    const std::string n = "neck.lateral" + std::to_string(i);
    inner[ui] = oracle::conv2d(f[ui].map, p.at(n + ".weight"), p.values(n + ".bias"), 1, 0, 1);
    dims[ui] = {f[ui].map.height(), f[ui].map.width()};
    if (i < 3) {
      const auto [th, tw] = dims[ui + 1];
      const auto [h, w] = dims[ui];
      for (int64_t c = 0; c < kPyramidWidth; ++c) {
        for (int64_t y = 0; y < h; ++y) {
          for (int64_t x = 0; x < w; ++x) {
            const int64_t sy = y * th / h, sx = x * tw / w;
            inner[ui][static_cast<size_t>((c * h + y) * w + x)] += inner[ui + 1][static_cast<size_t>((c * th + sy) * tw + sx)];
          }
        }
      }
    }
  }
  for (size_t i = 0; i < 4; ++i) {
    const auto [h, w] = dims[i];
    Tensor4 merged(1, kPyramidWidth, h, w);
    for (size_t j = 0; j < inner[i].size(); ++j) merged.values()[j] = static_cast<float>(inner[i][j]);
    const std::string n = "neck.smooth" + std::to_string(i);
    const auto want = oracle::conv2d(merged, p.at(n + ".weight"), p.values(n + ".bias"), 1, 1, 1);
    double worst = 0.0;
    for (size_t j = 0; j < want.size(); ++j) worst = std::max(worst, std::abs(pyr.levels[i].values()[j] - want[j]));
    CHECK(worst < 1e-4);
  }
  const Tensor4& p4 = pyr.levels[3];
  const Tensor4& p5 = pyr.levels[4];
  CHECK(p5.shape() == Shape4{1, 256, 1, 1});
  CHECK(p5.at(0, 7, 0, 0) == p4.at(0, 7, 0, 0));
}

TEST_CASE("zero laterals give a zero pyramid") {
  std::mt19937_64 gen(1);
  const auto f = features(gen, 64, 64);
  ParamSpecList specs;
  declare_neck_params(specs, kWidths);
  auto p = ParamStore::build(specs, 1);
  for (int i = 0; i < 4; ++i) {
    p.fill("neck.lateral" + std::to_string(i) + ".weight", 0.0f);
    p.fill("neck.lateral" + std::to_string(i) + ".bias", 0.0f);
    p.fill("neck.smooth" + std::to_string(i) + ".bias", 0.0f);
  }
  const Pyramid pyr = fpn(f, p);
  for (const auto& level : pyr.levels) {
    for (float v : level.values()) CHECK(v == 0.0f);
  }
}

TEST_CASE("two-level hand case") {
  // One channel everywhere; identity laterals; smoothing is a centre tap.
  std::array<StageFeature, 4> f;
  const int64_t sizes[4][2] = {{4, 4}, {2, 2}, {1, 1}, {1, 1}};
  for (size_t i = 0; i < 4; ++i) {
    f[i].map = Tensor4(1, 1, sizes[i][0], sizes[i][1], 0.0f);
    f[i].stage = static_cast<int>(i) + 1;
    f[i].stride = kStageStrides[i];
  }
  f[0].map.at(0, 0, 3, 3) = 5.0f;
  f[1].map.at(0, 0, 0, 1) = 2.0f;
  ParamSpecList specs;
  declare_neck_params(specs, {1, 1, 1, 1});
  auto p = ParamStore::build(specs, 0);
  for (int i = 0; i < 4; ++i) {
    std::vector<float> lat(256, 0.0f);
    lat[0] = 1.0f;
    p.set("neck.lateral" + std::to_string(i) + ".weight", lat);
    p.fill("neck.lateral" + std::to_string(i) + ".bias", 0.0f);
    std::vector<float> sm(256 * 256 * 9, 0.0f);
    sm[4] = 1.0f;
    p.set("neck.smooth" + std::to_string(i) + ".weight", sm);
    p.fill("neck.smooth" + std::to_string(i) + ".bias", 0.0f);
  }
  const Pyramid pyr = fpn(f, p);
  const Tensor4& p2 = pyr.levels[0];
  CHECK(p2.at(0, 0, 0, 2) == 2.0f);
  CHECK(p2.at(0, 0, 1, 3) == 2.0f);
  CHECK(p2.at(0, 0, 3, 3) == 5.0f);
  CHECK(p2.at(0, 0, 2, 0) == 0.0f);
  CHECK(p2.at(0, 1, 0, 2) == 0.0f);
  CHECK(pyr.levels[1].at(0, 0, 0, 1) == 2.0f);
}

TEST_CASE("pyramid dims at 320x416 and anchor metadata") {
  ModelConfig m;
  m.backbone.variant = Variant::kCustom;
  m.backbone.widths = {8, 16, 24, 32};
  m.backbone.depths = {1, 1, 1, 1};
  m.backbone.heads = {1, 2, 2, 4};
  m.fusion.mechanism = Mechanism::kNone;
  const auto params = init_params(m, 0);
  const auto out = run_model(m, params, Tensor4(1, 5, 320, 416, 0.25f));
  const auto want = oracle::pyramid_dims(320, 416);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(out.pyramid.levels[i].shape() == Shape4{1, 256, want[i][0], want[i][1]});
    CHECK(out.pyramid.strides[i] == (4 << i));
    CHECK(out.pyramid.anchor_sizes[i] == (32 << i));
  }
  CHECK(want[4] == std::array<int64_t, 2>{5, 7});
  CHECK(out.pyramid.anchor_ratios == std::array<double, 3>{0.5, 1.0, 2.0});
  CHECK_THROWS_AS(run_model(m, params, Tensor4(1, 5, 301, 391)), ShapeError);
}

TEST_CASE("neck rejects an inconsistent schedule") {
  std::mt19937_64 gen(3);
  auto f = features(gen, 32, 32);
  const auto p = neck_store(3);
  f[2].stride = 8;
  CHECK_THROWS_WITH_AS(fpn(f, p), doctest::Contains("stride"), ShapeError);
  f = features(gen, 32, 32);
  f[1].map = Tensor4(1, 7, 4, 4);
  CHECK_THROWS_WITH_AS(fpn(f, p), doctest::Contains("width"), ShapeError);
}
