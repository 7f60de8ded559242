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
#include "trifuse/preprocess.hpp"

#include <cmath>

#include "trifuse/errors.hpp"
#include "trifuse/kernels.hpp"

namespace trifuse {

namespace {

constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};
constexpr std::array<double, 3> kImageNetStd = {0.229, 0.224, 0.225};

// Chan et al. pairwise merge of (count, mean, M2) accumulators.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void merge(double nb, double mean_b, double m2_b) {
    if (nb == 0.0) return;
    const double total = n + nb;
    const double delta = mean_b - mean;
    mean += delta * nb / total;
    m2 += m2_b + delta * delta * n * nb / total;
    n = total;
  }
};

void check_five(const Tensor4& x, const char* op) {
  if (x.channels() != 5) {
    throw ShapeError(std::string(op) + ": expected 5 channels, got " + std::to_string(x.channels()));
  }
}

void accumulate(const Tensor4& x, const std::vector<int>& channels, std::array<Moments, 5>& acc) {
  check_five(x, "compute_stats");
  for (int c : channels) {
    for (int64_t b = 0; b < x.batch(); ++b) {
      auto p = x.plane(b, c);
      if (p.empty()) continue;
      double mean = 0.0;
      for (float v : p) mean += v;
      mean /= static_cast<double>(p.size());
      double m2 = 0.0;
      for (float v : p) m2 += (v - mean) * (v - mean);
      acc[static_cast<size_t>(c)].merge(static_cast<double>(p.size()), mean, m2);
    }
  }
}

NormStats finish(const std::array<Moments, 5>& acc, const std::vector<int>& channels, PixelScale scale) {
  auto base = NormStats::imagenet(scale);
  auto mean = base.mean();
  auto std = base.std();
  for (int c : channels) {
    const auto& m = acc[static_cast<size_t>(c)];
    mean[static_cast<size_t>(c)] = m.mean;
    std[static_cast<size_t>(c)] = std::max(std::sqrt(m.m2 / m.n), kStdFloor);
  }
  return NormStats(mean, std);
}

void check_channels(const std::vector<int>& channels) {
  for (int c : channels) {
    if (c != 3 && c != 4) throw ConfigError("channels", "statistics are computed for channels 3 and 4 only");
  }
}

}  // namespace

PixelScale parse_pixel_scale(const std::string& s) {
  if (s == "unit") return PixelScale::kUnit;
  if (s == "byte") return PixelScale::kByte;
  throw ConfigError("pixel_scale", "expected unit|byte, got \"" + s + "\"");
}

std::string_view to_string(PixelScale s) { return s == PixelScale::kUnit ? "unit" : "byte"; }

NormStats::NormStats(std::array<double, 5> mean, std::array<double, 5> std) : mean_(mean), std_(std) {
  for (size_t c = 0; c < 5; ++c) {
    if (!(std_[c] > 0.0)) {
      throw ValidationError("NormStats: std of channel " + std::to_string(c) + " must be > 0");
    }
  }
}

NormStats NormStats::imagenet(PixelScale scale) {
  const double k = scale == PixelScale::kUnit ? 1.0 : 255.0;
  return NormStats({kImageNetMean[0] * k, kImageNetMean[1] * k, kImageNetMean[2] * k, 0.0, 0.0},
                   {kImageNetStd[0] * k, kImageNetStd[1] * k, kImageNetStd[2] * k, 1.0, 1.0});
}

NormStats NormStats::identity() { return NormStats({0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}); }

Tensor4 normalize(const Tensor4& x, const NormStats& stats) {
  check_five(x, "normalize");
  Tensor4 out = x;
  for (int64_t b = 0; b < x.batch(); ++b) {
    for (int64_t c = 0; c < 5; ++c) {
      const double m = stats.mean()[static_cast<size_t>(c)];
      const double s = stats.std()[static_cast<size_t>(c)];
      for (auto& v : out.plane(b, c)) v = static_cast<float>((v - m) / s);
    }
  }
  return out;
}

Tensor4 denormalize(const Tensor4& x, const NormStats& stats) {
  check_five(x, "denormalize");
  Tensor4 out = x;
  for (int64_t b = 0; b < x.batch(); ++b) {
    for (int64_t c = 0; c < 5; ++c) {
      const double m = stats.mean()[static_cast<size_t>(c)];
      const double s = stats.std()[static_cast<size_t>(c)];
      for (auto& v : out.plane(b, c)) v = static_cast<float>(v * s + m);
    }
  }
  return out;
}

NormStats compute_stats(const std::vector<Tensor4>& frames, const std::vector<int>& channels, PixelScale scale) {
  check_channels(channels);
  if (frames.empty()) throw ValidationError("compute_stats: empty split");
  std::array<Moments, 5> acc{};
  for (const auto& f : frames) accumulate(f, channels, acc);
  return finish(acc, channels, scale);
}

NormStats compute_stats(const DatasetManifest& manifest, const std::vector<int>& channels, PixelScale scale) {
  check_channels(channels);
  if (manifest.empty()) throw ValidationError("compute_stats: empty split");
  std::array<Moments, 5> acc{};
  for (size_t i = 0; i < manifest.size(); ++i) accumulate(load_entry(manifest, i).pixels, channels, acc);
  return finish(acc, channels, scale);
}

int64_t round_up(int64_t v, int64_t multiple) { return (v + multiple - 1) / multiple * multiple; }

PaddedTensor pad_to_stride(const Tensor4& x, int64_t stride) {
  if (x.height() < 1 || x.width() < 1) throw ShapeError("pad_to_stride: empty spatial extent " + x.shape().str());
  return {pad_bottom_right(x, round_up(x.height(), stride), round_up(x.width(), stride)), x.height(), x.width()};
}

}  // namespace trifuse
