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

#include <functional>
#include <string>
#include <vector>

#include "biogen/numerics/ops.hpp"
#include "biogen/numerics/random.hpp"
#include "biogen/numerics/tensor.hpp"

namespace biogen::model {

using numerics::Tensor;

struct NamedParam {
  std::string name;
  Tensor tensor;
};

using ParamVisitor = std::function<void(const std::string& name, Tensor& tensor)>;

// Per-call forward settings. Dropout is active only when `train` is set.
struct ForwardContext {
  bool train = false;
  double dropout = 0.0;
  double attention_dropout = 0.0;
  Rng* rng = nullptr;

  double p() const { return train ? dropout : 0.0; }
  double attn_p() const { return train ? attention_dropout : 0.0; }
};

Tensor apply_dropout(const Tensor& x, const ForwardContext& ctx);

Tensor init_normal(Index rows, Index cols, double stddev, Rng& rng);

struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [1, out]

  Linear() = default;
  Linear(Index in, Index out, Rng& rng, double stddev = 0.02);
  Tensor operator()(const Tensor& x) const;
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct LayerNorm {
  Tensor gain;
  Tensor bias;

  LayerNorm() = default;
  explicit LayerNorm(Index dim);
  Tensor operator()(const Tensor& x) const;
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct MultiHeadAttention {
  Index heads = 1;
  Linear q, k, v, out;

  MultiHeadAttention() = default;
  MultiHeadAttention(Index dim, Index heads, Rng& rng);
  // Keys are computed from `key_input`, values from `value_input`.
  Tensor operator()(const Tensor& query_input, const Tensor& key_input, const Tensor& value_input,
                    const numerics::AttentionLayout& layout, const ForwardContext& ctx) const;
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct FeedForward {
  Linear in, out;

  FeedForward() = default;
  FeedForward(Index dim, Index hidden, Rng& rng);
  Tensor operator()(const Tensor& x, const ForwardContext& ctx) const;
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

// Pre-LN self-attention block.
struct EncoderLayer {
  LayerNorm ln_attn, ln_ff;
  MultiHeadAttention attn;
  FeedForward ff;

  EncoderLayer() = default;
  EncoderLayer(Index dim, Index heads, Index ff_dim, Rng& rng);
  Tensor operator()(const Tensor& x, const numerics::AttentionLayout& layout, const ForwardContext& ctx) const;
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

// Copies every parameter value into fresh leaf tensors.
template <class Module>
Module deep_copy(const Module& m) {
  Module copy = m;
  copy.visit("", [](const std::string&, Tensor& t) { t = t.clone(); });
  return copy;
}

}  // namespace biogen::model
