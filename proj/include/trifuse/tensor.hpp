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
#include <span>
#include <string>
#include <vector>

namespace trifuse {

struct Shape4 {
  int64_t b = 0;
  int64_t c = 0;
  int64_t h = 0;
  int64_t w = 0;

  int64_t numel() const { return b * c * h * w; }
  bool operator==(const Shape4&) const = default;
  std::string str() const;
};

/// Dense (batch, channel, height, width) float tensor, row-major with the
/// column index fastest.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int64_t b, int64_t c, int64_t h, int64_t w, float fill = 0.0f);
  Tensor4(Shape4 shape, std::vector<float> data);

  const Shape4& shape() const { return shape_; }
  int64_t batch() const { return shape_.b; }
  int64_t channels() const { return shape_.c; }
  int64_t height() const { return shape_.h; }
  int64_t width() const { return shape_.w; }
  int64_t numel() const { return shape_.numel(); }

  float& at(int64_t b, int64_t c, int64_t y, int64_t x) {
    return data_[static_cast<size_t>(((b * shape_.c + c) * shape_.h + y) * shape_.w + x)];
  }
  float at(int64_t b, int64_t c, int64_t y, int64_t x) const {
    return data_[static_cast<size_t>(((b * shape_.c + c) * shape_.h + y) * shape_.w + x)];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  /// Contiguous H*W plane of one (batch, channel) pair.
  std::span<float> plane(int64_t b, int64_t c);
  std::span<const float> plane(int64_t b, int64_t c) const;

 private:
  Shape4 shape_;
  std::vector<float> data_;
};

/// Token sequences (batch, tokens, channels); tokens enumerate a H*W grid
/// in row-major order.
class TokenMatrix {
 public:
  TokenMatrix() = default;
  TokenMatrix(int64_t b, int64_t n, int64_t c, float fill = 0.0f);
  TokenMatrix(int64_t b, int64_t n, int64_t c, std::vector<float> data);

  int64_t batch() const { return b_; }
  int64_t tokens() const { return n_; }
  int64_t channels() const { return c_; }
  int64_t numel() const { return b_ * n_ * c_; }

  float& at(int64_t b, int64_t n, int64_t c) {
    return data_[static_cast<size_t>((b * n_ + n) * c_ + c)];
  }
  float at(int64_t b, int64_t n, int64_t c) const {
    return data_[static_cast<size_t>((b * n_ + n) * c_ + c)];
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

 private:
  int64_t b_ = 0;
  int64_t n_ = 0;
  int64_t c_ = 0;
  std::vector<float> data_;
};

/// Row-major 2-D float matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int64_t rows, int64_t cols, float fill = 0.0f);
  Matrix(int64_t rows, int64_t cols, std::vector<float> data);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  float& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols_ + c)]; }
  float at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols_ + c)]; }
  std::span<float> row(int64_t r) { return {data_.data() + r * cols_, static_cast<size_t>(cols_)}; }
  std::span<const float> row(int64_t r) const {
    return {data_.data() + r * cols_, static_cast<size_t>(cols_)};
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<float> data_;
};

TokenMatrix to_tokens(const Tensor4& x);
Tensor4 to_map(const TokenMatrix& t, int64_t h, int64_t w);

/// Byte-for-byte comparison of shape and contents.
bool bitwise_equal(const Tensor4& a, const Tensor4& b);
bool bitwise_equal(const TokenMatrix& a, const TokenMatrix& b);

/// Largest absolute elementwise difference; throws ShapeError on mismatch.
double max_abs_diff(std::span<const float> a, std::span<const float> b);

bool all_finite(std::span<const float> v);

}  // namespace trifuse
