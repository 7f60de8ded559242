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
#include "trifuse/tensor.hpp"

#include <cmath>
#include <cstring>

#include "trifuse/errors.hpp"

namespace trifuse {

std::string Shape4::str() const {
  return "(" + std::to_string(b) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {

void check_dims(std::initializer_list<int64_t> dims) {
  for (auto d : dims) {
    if (d < 0) throw ShapeError("negative tensor dimension " + std::to_string(d));
  }
}

}  // namespace

Tensor4::Tensor4(int64_t b, int64_t c, int64_t h, int64_t w, float fill) : shape_{b, c, h, w} {
  check_dims({b, c, h, w});
  data_.assign(static_cast<size_t>(shape_.numel()), fill);
}

Tensor4::Tensor4(Shape4 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  check_dims({shape.b, shape.c, shape.h, shape.w});
  if (static_cast<int64_t>(data_.size()) != shape_.numel()) {
    throw ShapeError("buffer length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_.str());
  }
}

std::span<float> Tensor4::plane(int64_t b, int64_t c) {
  auto hw = shape_.h * shape_.w;
  return {data_.data() + (b * shape_.c + c) * hw, static_cast<size_t>(hw)};
}

std::span<const float> Tensor4::plane(int64_t b, int64_t c) const {
  auto hw = shape_.h * shape_.w;
  return {data_.data() + (b * shape_.c + c) * hw, static_cast<size_t>(hw)};
}

TokenMatrix::TokenMatrix(int64_t b, int64_t n, int64_t c, float fill) : b_(b), n_(n), c_(c) {
  check_dims({b, n, c});
  data_.assign(static_cast<size_t>(b * n * c), fill);
}

TokenMatrix::TokenMatrix(int64_t b, int64_t n, int64_t c, std::vector<float> data)
    : b_(b), n_(n), c_(c), data_(std::move(data)) {
  check_dims({b, n, c});
  if (static_cast<int64_t>(data_.size()) != b * n * c) {
    throw ShapeError("token buffer length " + std::to_string(data_.size()) +
                     " does not match (B,N,C)");
  }
}

Matrix::Matrix(int64_t rows, int64_t cols, float fill) : rows_(rows), cols_(cols) {
  check_dims({rows, cols});
  data_.assign(static_cast<size_t>(rows * cols), fill);
}

Matrix::Matrix(int64_t rows, int64_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  check_dims({rows, cols});
  if (static_cast<int64_t>(data_.size()) != rows * cols) {
    throw ShapeError("matrix buffer length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

TokenMatrix to_tokens(const Tensor4& x) {
  const auto& s = x.shape();
  TokenMatrix t(s.b, s.h * s.w, s.c);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      auto src = x.plane(b, c);
      for (int64_t n = 0; n < s.h * s.w; ++n) t.at(b, n, c) = src[static_cast<size_t>(n)];
    }
  }
  return t;
}

Tensor4 to_map(const TokenMatrix& t, int64_t h, int64_t w) {
  if (h * w != t.tokens()) {
    throw ShapeError("token count " + std::to_string(t.tokens()) + " != H*W = " +
                     std::to_string(h) + "*" + std::to_string(w));
  }
  Tensor4 x(t.batch(), t.channels(), h, w);
  for (int64_t b = 0; b < t.batch(); ++b) {
    for (int64_t c = 0; c < t.channels(); ++c) {
      auto dst = x.plane(b, c);
      for (int64_t n = 0; n < h * w; ++n) dst[static_cast<size_t>(n)] = t.at(b, n, c);
    }
  }
  return x;
}

bool bitwise_equal(const Tensor4& a, const Tensor4& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

bool bitwise_equal(const TokenMatrix& a, const TokenMatrix& b) {
  return a.batch() == b.batch() && a.tokens() == b.tokens() && a.channels() == b.channels() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw ShapeError("max_abs_diff: length " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

bool all_finite(std::span<const float> v) {
  for (float f : v) {
    if (!std::isfinite(f)) return false;
  }
  return true;
}

}  // namespace trifuse
