/* Copyright 2026 The semdef Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef SEMDEF_CORE_OPS_HPP_
#define SEMDEF_CORE_OPS_HPP_

// Differentiable primitives. Operands are viewed as matrices (rows x cols,
// cols = last extent). There is no implicit broadcasting; add_bias and
// scale_rows are the only ops that combine operands of different shapes.

#include <cstdint>
#include <span>
#include <vector>

#include "semdef/core/graph.hpp"
#include "semdef/core/tokens.hpp"

namespace semdef {

// Row-major visibility flags: nonzero entries take part in the reduction.
using Mask = std::vector<std::uint8_t>;

// [m x k] * [k x n] -> [m x n].
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);

template <typename T>
Var<T> transpose(Var<T> a);

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
// Elementwise product.
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
// scale * a + shift, elementwise.
template <typename T>
Var<T> affine(Var<T> a, T scale, T shift = T{0});

// a[r x c] + bias broadcast over rows; bias holds c values.
template <typename T>
Var<T> add_bias(Var<T> a, Var<T> bias);
// Row i of a[r x c] multiplied by s[i]; s holds r values.
template <typename T>
Var<T> scale_rows(Var<T> a, Var<T> s);

template <typename T>
Var<T> sigmoid(Var<T> x);
template <typename T>
Var<T> tanh(Var<T> x);
template <typename T>
Var<T> relu(Var<T> x);

// Softmax over the last axis with max subtraction.
template <typename T>
Var<T> softmax(Var<T> x);
// Softmax over the visible entries of each row; hidden entries are exactly 0.
// A row with no visible entry is a DimensionError.
template <typename T>
Var<T> masked_softmax(Var<T> x, const Mask& visible);

// Standardises each row then applies gain and bias (both of length cols).
template <typename T>
Var<T> layer_norm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts);
template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts);
template <typename T>
Var<T> concat_cols(std::initializer_list<Var<T>> parts) {
  return concat_cols(std::span<const Var<T>>(parts.begin(), parts.size()));
}
template <typename T>
Var<T> concat_rows(std::initializer_list<Var<T>> parts) {
  return concat_rows(std::span<const Var<T>>(parts.begin(), parts.size()));
}

template <typename T>
Var<T> slice_rows(Var<T> x, std::size_t begin, std::size_t count);
template <typename T>
Var<T> slice_cols(Var<T> x, std::size_t begin, std::size_t count);
// [1 x c] -> [n x c].
template <typename T>
Var<T> repeat_rows(Var<T> x, std::size_t n);
// Sliding windows of `width` consecutive rows, each flattened into one row:
// [L x c] -> [(L - width + 1) x (width * c)].
template <typename T>
Var<T> unfold_rows(Var<T> x, std::size_t width);
// Column-wise maximum, [r x c] -> [1 x c]. Ties route gradient to the first.
template <typename T>
Var<T> max_rows(Var<T> x);

// Sum of all entries, shape [1].
template <typename T>
Var<T> sum(Var<T> x);

template <typename T>
Var<T> reshape(Var<T> x, Shape shape);

// Rows `ids` of a parameter table. Gradient scatters into the looked-up rows
// of the parameter unless it is frozen.
template <typename T>
Var<T> lookup(Graph<T>& g, Parameter<T>& table, std::span<const TokenId> ids);

// Inverted dropout; identity when p == 0 or the graph is not tracking.
template <typename T>
Var<T> dropout(Var<T> x, double p, Rng& rng);

// Label-smoothed negative log-likelihood, averaged over positions whose
// `mask` entry is nonzero. Per position:
//   (1 - s) * -log p(target) + s * mean_{j != target} -log p(j).
// logits: [T x V]; targets and mask hold T entries.
template <typename T>
Var<T> cross_entropy_smoothed(Var<T> logits, std::span<const std::size_t> targets,
                              T smoothing, const Mask& mask);

template <typename T>
Var<T> operator+(Var<T> a, Var<T> b) {
  return add(a, b);
}
template <typename T>
Var<T> operator-(Var<T> a, Var<T> b) {
  return sub(a, b);
}
template <typename T>
Var<T> operator*(Var<T> a, Var<T> b) {
  return mul(a, b);
}

}  // namespace semdef

#endif  // SEMDEF_CORE_OPS_HPP_
