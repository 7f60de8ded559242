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

// Forward-only dense kernels. Buffers are float; every reduction (matmul,
// convolution, normalisation, softmax, pooling) accumulates in double and
// rounds once on store. All functions are pure and single-threaded, so
// results are bitwise reproducible.

#include <span>

#include "trifuse/params.hpp"
#include "trifuse/tensor.hpp"

namespace trifuse {

/// Direct 2-D convolution with symmetric zero padding. `weight` has shape
/// (Cout, Cin/groups, k, k) with odd k; `bias` is empty or length Cout.
Tensor4 conv2d(const Tensor4& x, const Param& weight, std::span<const float> bias, int stride,
               int pad, int groups = 1);

/// Output extent of a convolution along one axis.
int64_t conv_out_dim(int64_t in, int64_t kernel, int stride, int pad);

/// y = x W^T + b applied to every token; `weight` is (out, in).
TokenMatrix linear(const TokenMatrix& x, const Param& weight, std::span<const float> bias);

/// Per-token LayerNorm over the channel axis.
TokenMatrix layer_norm(const TokenMatrix& t, std::span<const float> gamma,
                       std::span<const float> beta, double eps = 1e-6);

Matrix softmax_rows(const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);

/// softmax(scale * q k^T) v, evaluated in query blocks so the full score
/// matrix is never materialised. q: (Nq, d), k: (Nk, d), v: (Nk, dv).
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, double scale);

/// The full softmax(scale * q k^T) matrix; for inspection on small inputs.
Matrix attention_weights(const Matrix& q, const Matrix& k, double scale);

float sigmoid(float x);
float gelu(float x);
void sigmoid_inplace(std::span<float> v);
void gelu_inplace(std::span<float> v);
void relu_inplace(std::span<float> v);

/// Spatial reductions to (B, C).
Matrix global_avg_pool(const Tensor4& x);
Matrix global_max_pool(const Tensor4& x);

/// Zero-extends bottom/right to (new_h, new_w).
Tensor4 pad_bottom_right(const Tensor4& x, int64_t new_h, int64_t new_w);
/// Nearest-neighbour resize, source index floor(dst * in / out).
Tensor4 upsample_nearest(const Tensor4& x, int64_t out_h, int64_t out_w);
Tensor4 max_pool2d(const Tensor4& x, int kernel, int stride);

Tensor4 add(const Tensor4& a, const Tensor4& b);
/// Elementwise (a + b) / 2.
Tensor4 mean_of(const Tensor4& a, const Tensor4& b);
Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
Tensor4 slice_channels(const Tensor4& x, int64_t begin, int64_t end);

/// Extracts `Matrix` views of token batches (rows = tokens).
Matrix batch_rows(const TokenMatrix& t, int64_t b);

}  // namespace trifuse
