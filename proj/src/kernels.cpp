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
#include "trifuse/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "trifuse/errors.hpp"

namespace trifuse {

namespace {

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapF = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Upper bound on doubles held by one im2col / GEMM row block.
constexpr int64_t kBlockElems = int64_t{1} << 22;

std::string dim_msg(const char* op, const char* dim, int64_t got, int64_t want) {
  return std::string(op) + ": " + dim + " is " + std::to_string(got) + ", expected " +
         std::to_string(want);
}

MatD to_double(const float* data, int64_t rows, int64_t cols) {
  return MapF(data, rows, cols).cast<double>();
}

void softmax_rows_inplace(MatD& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
}

}  // namespace

int64_t conv_out_dim(int64_t in, int64_t kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

Tensor4 conv2d(const Tensor4& x, const Param& weight, std::span<const float> bias, int stride,
               int pad, int groups) {
  if (weight.shape.size() != 4) {
    throw ShapeError(dim_msg("conv2d", "weight rank", static_cast<int64_t>(weight.shape.size()), 4));
  }
  const int64_t cout = weight.shape[0];
  const int64_t cin_g = weight.shape[1];
  const int64_t k = weight.shape[2];
  const auto& s = x.shape();
  if (groups < 1 || s.c % groups != 0) {
    throw ShapeError(dim_msg("conv2d", "input channels (mod groups)", s.c % std::max(groups, 1), 0));
  }
  if (cout % groups != 0) throw ShapeError(dim_msg("conv2d", "output channels (mod groups)", cout % groups, 0));
  if (cin_g != s.c / groups) throw ShapeError(dim_msg("conv2d", "weight in-channels", cin_g, s.c / groups));
  if (weight.shape[3] != k) throw ShapeError(dim_msg("conv2d", "kernel width", weight.shape[3], k));
  if (k % 2 == 0 && k != 1 && !(pad == 0 && stride == k)) {
    // Even kernels are only accepted as non-overlapping patch reducers.
    throw ShapeError(dim_msg("conv2d", "kernel size (even)", k, k + 1));
  }
  if (pad < 0) throw ShapeError(dim_msg("conv2d", "padding", pad, 0));
  if (stride < 1) throw ShapeError(dim_msg("conv2d", "stride", stride, 1));
  if (!bias.empty() && static_cast<int64_t>(bias.size()) != cout) {
    throw ShapeError(dim_msg("conv2d", "bias length", static_cast<int64_t>(bias.size()), cout));
  }
  if (s.h + 2 * pad < k) throw ShapeError(dim_msg("conv2d", "padded input height", s.h + 2 * pad, k));
  if (s.w + 2 * pad < k) throw ShapeError(dim_msg("conv2d", "padded input width", s.w + 2 * pad, k));

  const int64_t ho = conv_out_dim(s.h, k, stride, pad);
  const int64_t wo = conv_out_dim(s.w, k, stride, pad);
  const int64_t cout_g = cout / groups;
  Tensor4 out(s.b, cout, ho, wo);
  const float* w = weight.values.data();

  if (cin_g == 1 && cout_g == 1) {
    // Depthwise: one filter per channel, accumulated directly.
    for (int64_t b = 0; b < s.b; ++b) {
      for (int64_t c = 0; c < cout; ++c) {
        auto src = x.plane(b, c);
        auto dst = out.plane(b, c);
        const float* wc = w + c * k * k;
        const double b0 = bias.empty() ? 0.0 : bias[static_cast<size_t>(c)];
        for (int64_t oy = 0; oy < ho; ++oy) {
          for (int64_t ox = 0; ox < wo; ++ox) {
            double acc = b0;
            for (int64_t ky = 0; ky < k; ++ky) {
              const int64_t iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= s.h) continue;
              for (int64_t kx = 0; kx < k; ++kx) {
                const int64_t ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= s.w) continue;
                acc += static_cast<double>(wc[ky * k + kx]) * src[static_cast<size_t>(iy * s.w + ix)];
              }
            }
            dst[static_cast<size_t>(oy * wo + ox)] = static_cast<float>(acc);
          }
        }
      }
    }
    return out;
  }

  // im2col + GEMM per group, blocked over output pixels.
  const int64_t kg = cin_g * k * k;
  const int64_t npix = ho * wo;
  const int64_t block = std::max<int64_t>(1, std::min(npix, kBlockElems / std::max<int64_t>(kg, 1)));
  MatD col;
  for (int64_t g = 0; g < groups; ++g) {
    const MatD wg = to_double(w + g * cout_g * kg, cout_g, kg);
    for (int64_t b = 0; b < s.b; ++b) {
      for (int64_t p0 = 0; p0 < npix; p0 += block) {
        const int64_t p1 = std::min(npix, p0 + block);
        col.resize(kg, p1 - p0);
        for (int64_t ci = 0; ci < cin_g; ++ci) {
          auto src = x.plane(b, g * cin_g + ci);
          for (int64_t ky = 0; ky < k; ++ky) {
            for (int64_t kx = 0; kx < k; ++kx) {
              double* row = col.row((ci * k + ky) * k + kx).data();
              int64_t oy = p0 / wo;
              int64_t ox = p0 % wo;
              for (int64_t p = p0; p < p1; ++p) {
                const int64_t iy = oy * stride - pad + ky;
                const int64_t ix = ox * stride - pad + kx;
                row[p - p0] = (iy >= 0 && iy < s.h && ix >= 0 && ix < s.w)
                                  ? static_cast<double>(src[static_cast<size_t>(iy * s.w + ix)])
                                  : 0.0;
                if (++ox == wo) {
                  ox = 0;
                  ++oy;
                }
              }
            }
          }
        }
        const MatD res = wg * col;
        for (int64_t co = 0; co < cout_g; ++co) {
          const int64_t c = g * cout_g + co;
          const double b0 = bias.empty() ? 0.0 : bias[static_cast<size_t>(c)];
          auto dst = out.plane(b, c);
          for (int64_t p = p0; p < p1; ++p) {
            dst[static_cast<size_t>(p)] = static_cast<float>(res(co, p - p0) + b0);
          }
        }
      }
    }
  }
  return out;
}

TokenMatrix linear(const TokenMatrix& x, const Param& weight, std::span<const float> bias) {
  if (weight.shape.size() != 2) {
    throw ShapeError(dim_msg("linear", "weight rank", static_cast<int64_t>(weight.shape.size()), 2));
  }
  const int64_t out_f = weight.shape[0];
  const int64_t in_f = weight.shape[1];
  if (in_f != x.channels()) throw ShapeError(dim_msg("linear", "input features", x.channels(), in_f));
  if (!bias.empty() && static_cast<int64_t>(bias.size()) != out_f) {
    throw ShapeError(dim_msg("linear", "bias length", static_cast<int64_t>(bias.size()), out_f));
  }
  TokenMatrix y(x.batch(), x.tokens(), out_f);
  const MatD wt = to_double(weight.values.data(), out_f, in_f).transpose();
  const int64_t rows = x.batch() * x.tokens();
  const int64_t block = std::max<int64_t>(1, kBlockElems / std::max<int64_t>(std::max(in_f, out_f), 1));
  for (int64_t r0 = 0; r0 < rows; r0 += block) {
    const int64_t r1 = std::min(rows, r0 + block);
    const MatD a = to_double(x.data().data() + r0 * in_f, r1 - r0, in_f);
    const MatD res = a * wt;
    float* dst = y.data().data() + r0 * out_f;
    for (int64_t r = 0; r < r1 - r0; ++r) {
      for (int64_t c = 0; c < out_f; ++c) {
        double v = res(r, c);
        if (!bias.empty()) v += bias[static_cast<size_t>(c)];
        dst[r * out_f + c] = static_cast<float>(v);
      }
    }
  }
  return y;
}

TokenMatrix layer_norm(const TokenMatrix& t, std::span<const float> gamma,
                       std::span<const float> beta, double eps) {
  const int64_t c = t.channels();
  if (static_cast<int64_t>(gamma.size()) != c) {
    throw ShapeError(dim_msg("layer_norm", "gamma length", static_cast<int64_t>(gamma.size()), c));
  }
  if (static_cast<int64_t>(beta.size()) != c) {
    throw ShapeError(dim_msg("layer_norm", "beta length", static_cast<int64_t>(beta.size()), c));
  }
  if (!(eps > 0.0)) throw ShapeError("layer_norm: eps must be positive");
  TokenMatrix y(t.batch(), t.tokens(), c);
  const int64_t rows = t.batch() * t.tokens();
  const float* src = t.data().data();
  float* dst = y.data().data();
  for (int64_t r = 0; r < rows; ++r) {
    const float* xr = src + r * c;
    double mean = 0.0;
    for (int64_t i = 0; i < c; ++i) mean += xr[i];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t i = 0; i < c; ++i) {
      const double d = xr[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t i = 0; i < c; ++i) {
      dst[r * c + i] = static_cast<float>((xr[i] - mean) * inv * gamma[static_cast<size_t>(i)] +
                                          beta[static_cast<size_t>(i)]);
    }
  }
  return y;
}

Matrix softmax_rows(const Matrix& m) {
  MatD s = to_double(m.data().data(), m.rows(), m.cols());
  softmax_rows_inplace(s);
  Matrix out(m.rows(), m.cols());
  for (int64_t r = 0; r < m.rows(); ++r) {
    for (int64_t c = 0; c < m.cols(); ++c) out.at(r, c) = static_cast<float>(s(r, c));
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError(dim_msg("matmul", "inner dimension", b.rows(), a.cols()));
  const MatD res = to_double(a.data().data(), a.rows(), a.cols()) *
                   to_double(b.data().data(), b.rows(), b.cols());
  Matrix out(a.rows(), b.cols());
  for (int64_t r = 0; r < a.rows(); ++r) {
    for (int64_t c = 0; c < b.cols(); ++c) out.at(r, c) = static_cast<float>(res(r, c));
  }
  return out;
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale) {
  if (q.cols() != k.cols()) throw ShapeError(dim_msg("attention", "key width", k.cols(), q.cols()));
  if (k.rows() != v.rows()) throw ShapeError(dim_msg("attention", "value rows", v.rows(), k.rows()));
  const MatD kt = to_double(k.data().data(), k.rows(), k.cols()).transpose();
  const MatD vd = to_double(v.data().data(), v.rows(), v.cols());
  Matrix out(q.rows(), v.cols());
  const int64_t block = std::max<int64_t>(1, kBlockElems / std::max<int64_t>(k.rows(), 1));
  for (int64_t r0 = 0; r0 < q.rows(); r0 += block) {
    const int64_t r1 = std::min(q.rows(), r0 + block);
    MatD s = to_double(q.data().data() + r0 * q.cols(), r1 - r0, q.cols()) * kt;
    s *= scale;
    softmax_rows_inplace(s);
    const MatD o = s * vd;
    for (int64_t r = 0; r < r1 - r0; ++r) {
      for (int64_t c = 0; c < v.cols(); ++c) out.at(r0 + r, c) = static_cast<float>(o(r, c));
    }
  }
  return out;
}

Matrix attention_weights(const Matrix& q, const Matrix& k, double scale) {
  if (q.cols() != k.cols()) throw ShapeError(dim_msg("attention", "key width", k.cols(), q.cols()));
  MatD s = to_double(q.data().data(), q.rows(), q.cols()) *
           to_double(k.data().data(), k.rows(), k.cols()).transpose();
  s *= scale;
  softmax_rows_inplace(s);
  Matrix out(q.rows(), k.rows());
  for (int64_t r = 0; r < q.rows(); ++r) {
    for (int64_t c = 0; c < k.rows(); ++c) out.at(r, c) = static_cast<float>(s(r, c));
  }
  return out;
}

float sigmoid(float x) { return static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(x)))); }

float gelu(float x) {
  const double d = x;
  return static_cast<float>(0.5 * d * (1.0 + std::erf(d / std::sqrt(2.0))));
}

void sigmoid_inplace(std::span<float> v) {
  for (auto& f : v) f = sigmoid(f);
}

void gelu_inplace(std::span<float> v) {
  for (auto& f : v) f = gelu(f);
}

void relu_inplace(std::span<float> v) {
  for (auto& f : v) f = f > 0.0f ? f : 0.0f;
}

Matrix global_avg_pool(const Tensor4& x) {
  const auto& s = x.shape();
  Matrix out(s.b, s.c);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      double acc = 0.0;
      for (float f : x.plane(b, c)) acc += f;
      out.at(b, c) = static_cast<float>(acc / static_cast<double>(s.h * s.w));
    }
  }
  return out;
}

Matrix global_max_pool(const Tensor4& x) {
  const auto& s = x.shape();
  Matrix out(s.b, s.c);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      auto p = x.plane(b, c);
      out.at(b, c) = p.empty() ? 0.0f : *std::max_element(p.begin(), p.end());
    }
  }
  return out;
}

Tensor4 pad_bottom_right(const Tensor4& x, int64_t new_h, int64_t new_w) {
  const auto& s = x.shape();
  if (new_h < s.h || new_w < s.w) {
    throw ShapeError("pad_bottom_right: target " + std::to_string(new_h) + "x" +
                     std::to_string(new_w) + " smaller than input " + s.str());
  }
  if (new_h == s.h && new_w == s.w) return x;
  Tensor4 out(s.b, s.c, new_h, new_w);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      auto src = x.plane(b, c);
      auto dst = out.plane(b, c);
      for (int64_t y = 0; y < s.h; ++y) {
        std::copy_n(src.begin() + y * s.w, s.w, dst.begin() + y * new_w);
      }
    }
  }
  return out;
}

Tensor4 upsample_nearest(const Tensor4& x, int64_t out_h, int64_t out_w) {
  const auto& s = x.shape();
  Tensor4 out(s.b, s.c, out_h, out_w);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      auto src = x.plane(b, c);
      auto dst = out.plane(b, c);
      for (int64_t y = 0; y < out_h; ++y) {
        const int64_t sy = y * s.h / out_h;
        for (int64_t xx = 0; xx < out_w; ++xx) {
          dst[static_cast<size_t>(y * out_w + xx)] = src[static_cast<size_t>(sy * s.w + xx * s.w / out_w)];
        }
      }
    }
  }
  return out;
}

Tensor4 max_pool2d(const Tensor4& x, int kernel, int stride) {
  const auto& s = x.shape();
  if (kernel < 1 || stride < 1 || s.h < kernel || s.w < kernel) {
    throw ShapeError("max_pool2d: kernel " + std::to_string(kernel) + " does not fit " + s.str());
  }
  const int64_t ho = (s.h - kernel) / stride + 1;
  const int64_t wo = (s.w - kernel) / stride + 1;
  Tensor4 out(s.b, s.c, ho, wo);
  for (int64_t b = 0; b < s.b; ++b) {
    for (int64_t c = 0; c < s.c; ++c) {
      auto src = x.plane(b, c);
      auto dst = out.plane(b, c);
      for (int64_t oy = 0; oy < ho; ++oy) {
        for (int64_t ox = 0; ox < wo; ++ox) {
          float m = -std::numeric_limits<float>::infinity();
          for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
              m = std::max(m, src[static_cast<size_t>((oy * stride + ky) * s.w + ox * stride + kx)]);
            }
          }
          dst[static_cast<size_t>(oy * wo + ox)] = m;
        }
      }
    }
  }
  return out;
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("add: " + a.shape().str() + " vs " + b.shape().str());
  Tensor4 out = a;
  auto d = out.data();
  auto s = b.data();
  for (size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  return out;
}

Tensor4 mean_of(const Tensor4& a, const Tensor4& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("mean_of: " + a.shape().str() + " vs " + b.shape().str());
  Tensor4 out = a;
  auto d = out.data();
  auto s = b.data();
  for (size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<float>((static_cast<double>(d[i]) + s[i]) * 0.5);
  }
  return out;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  if (sa.b != sb.b || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat_channels: " + sa.str() + " vs " + sb.str());
  }
  Tensor4 out(sa.b, sa.c + sb.c, sa.h, sa.w);
  for (int64_t n = 0; n < sa.b; ++n) {
    for (int64_t c = 0; c < sa.c; ++c) std::ranges::copy(a.plane(n, c), out.plane(n, c).begin());
    for (int64_t c = 0; c < sb.c; ++c) std::ranges::copy(b.plane(n, c), out.plane(n, sa.c + c).begin());
  }
  return out;
}

Tensor4 slice_channels(const Tensor4& x, int64_t begin, int64_t end) {
  const auto& s = x.shape();
  if (begin < 0 || end > s.c || begin > end) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside " + std::to_string(s.c) + " channels");
  }
  Tensor4 out(s.b, end - begin, s.h, s.w);
  for (int64_t n = 0; n < s.b; ++n) {
    for (int64_t c = begin; c < end; ++c) std::ranges::copy(x.plane(n, c), out.plane(n, c - begin).begin());
  }
  return out;
}

Matrix batch_rows(const TokenMatrix& t, int64_t b) {
  const auto n = t.tokens() * t.channels();
  std::vector<float> v(t.data().begin() + b * n, t.data().begin() + (b + 1) * n);
  return Matrix(t.tokens(), t.channels(), std::move(v));
}

}  // namespace trifuse
