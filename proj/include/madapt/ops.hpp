// Copyright 2026 The madapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Differentiable primitives.
//
// Shape conventions: rank-1 tensors of length n behave as 1×n rows and a
// one-element tensor behaves as a scalar. Elementwise binary ops broadcast
// in two dimensions: each operand dimension must equal the other or be 1.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "madapt/tensor.hpp"

namespace madapt {

// [m×k] · [k×n] -> [m×n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [m×k] · [n×k]ᵀ -> [m×n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& x) { return scale(x, s); }

// Concatenates along axis 0 (rows) or 1 (columns) of the 2-D views.
Tensor concat(const std::vector<Tensor>& xs, int axis);
// Half-open [begin, end) along an axis of the 2-D view.
Tensor slice(const Tensor& x, int axis, std::size_t begin, std::size_t end);
Tensor reshape(const Tensor& x, Shape shape);

Tensor sum(const Tensor& x);
// Sum of all values divided by the count (not multiplied by its inverse).
Tensor mean(const Tensor& x);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x, int axis);
Tensor log_softmax(const Tensor& x, int axis);
// Values limited to [lo, hi]; gradient passes only where x was inside.
Tensor clamp(const Tensor& x, double lo, double hi);

// out[i][j] = Σ_d (x[i][d] − y[j][d])²
Tensor sqdist(const Tensor& x, const Tensor& y);

// [B×d] -> [(B·k)×d], each row repeated k times consecutively.
Tensor repeat_rows(const Tensor& x, std::size_t k);
// [(B·k)×d] -> [B×d], sums each consecutive group of k rows.
Tensor segment_sum(const Tensor& x, std::size_t k);
// Same grouping as segment_sum, divided by k.
Tensor segment_mean(const Tensor& x, std::size_t k);

// Rows of a [V×d] table. Gradient into row `frozen_row` is discarded when
// frozen_row >= 0.
Tensor gather_rows(const Tensor& table, std::span<const std::uint32_t> idx,
                   long frozen_row = -1);
// [B×C], labels[B] -> [B], out[b] = x[b][labels[b]].
Tensor pick(const Tensor& x, std::span<const std::uint32_t> labels);

// Row-wise select: out[i] = take_a[i] ? a[i] : b[i]. a and b share a shape.
Tensor where_rows(std::span<const std::uint8_t> take_a, const Tensor& a,
                  const Tensor& b);

/// Gradient reversal: identity forward, −coefficient × upstream backward.
Tensor grl(const Tensor& x, double coefficient);

}  // namespace madapt
