// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

// Elementwise binary ops broadcast numpy-style (trailing dimensions aligned,
// size-1 dimensions stretched).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor neg(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope);
Tensor tanh(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor log(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);
/// max(x, lo); gradient is zero where the floor is active.
Tensor clamp_min(const Tensor& x, double lo);

/// Sum of all elements, shape {1}.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_axis(const Tensor& x, std::size_t axis, bool keepdim = false);
Tensor mean_axis(const Tensor& x, std::size_t axis, bool keepdim = false);

/// Euclidean norm of each row of a 2-D tensor, shape {rows}. The gradient of
/// a zero row is zero.
Tensor row_norm(const Tensor& x);

/// [M, K] x [K, N] -> [M, N].
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& x, Shape shape);
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Rows of a 2-D table, [n, E].
Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& rows);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }
inline Tensor operator+(const Tensor& a, double s) { return add_scalar(a, s); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

struct Conv1dOptions {
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;  // zeros on both sides
  std::size_t groups = 1;
};

/// x [B, Cin, L], w [Cout, Cin/groups, K], bias [Cout] or undefined.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, const Conv1dOptions& opt = {});
std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, const Conv1dOptions& opt);

/// x [B, Cin, L], w [Cin, Cout, K]; output length (L-1)*stride - 2*padding + K.
Tensor conv_transpose1d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t stride,
                        std::size_t padding = 0);

/// Non-overlapping-or-not average pooling over the last axis of [B, C, L],
/// no padding; output length (L - kernel) / stride + 1.
Tensor avg_pool1d(const Tensor& x, std::size_t kernel, std::size_t stride);

}  // namespace fpvoc::nn
