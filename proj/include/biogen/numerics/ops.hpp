// Copyright 2026 The Biogen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Differentiable operations over `Tensor`. All tensors are handled as
// row-major matrices; rank-1 values are single rows.

#include <cstdint>
#include <span>
#include <vector>

#include "biogen/numerics/random.hpp"
#include "biogen/numerics/tensor.hpp"

namespace biogen::numerics {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_row(const Tensor& a, const Tensor& row);     // row: [1, cols]
Tensor scale_rows(const Tensor& a, const Tensor& w);    // w: [rows, 1]

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T

Tensor gelu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

// Row-wise softmax(x / temperature).
Tensor softmax(const Tensor& x, double temperature = 1.0);
Tensor log_softmax(const Tensor& x);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, Index begin, Index count);
Tensor gather_cols(const Tensor& a, std::span<const Index> cols);

// Builds a [n, 1] column whose row i is w[source[i]] (w flattened), or
// `fill` when source[i] < 0.
Tensor expand_to_rows(const Tensor& w, std::span<const Index> source, double fill);

struct Segment {
  Index begin = 0;
  Index count = 0;
};

// Mean of each row segment: [segments, cols].
Tensor segment_mean(const Tensor& x, std::span<const Segment> segments);

// One rectangular attention region. Query row `q_begin + i` may attend key
// `k_begin + j` when `causal_offset < 0` or `j <= i + causal_offset`.
struct AttentionBlock {
  Index q_begin = 0;
  Index q_count = 0;
  Index k_begin = 0;
  Index k_count = 0;
  Index causal_offset = -1;
};

struct AttentionLayout {
  std::vector<AttentionBlock> blocks;

  static AttentionLayout full(Index q_rows, Index k_rows);
  static AttentionLayout causal_with_memory(Index q_rows, Index memory_rows);
};

// Fused multi-head scaled dot-product attention. q: [Lq, d], k/v: [Lk, d];
// heads split the column dimension. Rows of q outside every block are zero.
// `dropout > 0` requires an rng and drops attention probabilities.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, Index heads,
                 const AttentionLayout& layout, double dropout = 0.0, Rng* rng = nullptr);

Tensor dropout(const Tensor& a, double p, Rng& rng);

// Mean over positions of the label-smoothed cross entropy. eps = 0 is plain NLL.
Tensor label_smoothed_nll(const Tensor& logits, std::span<const std::int32_t> targets, double eps);

}  // namespace biogen::numerics
