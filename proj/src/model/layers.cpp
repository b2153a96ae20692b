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

#include "biogen/model/layers.hpp"

#include <stdexcept>

namespace biogen::model {

using numerics::AttentionLayout;

Tensor apply_dropout(const Tensor& x, const ForwardContext& ctx) {
  const double p = ctx.p();
  if (p <= 0.0) return x;
  if (!ctx.rng) throw std::invalid_argument("dropout requires an rng");
  return numerics::dropout(x, p, *ctx.rng);
}

Tensor init_normal(Index rows, Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
  return Tensor(std::move(m), true);
}

Linear::Linear(Index in, Index out, Rng& rng, double stddev)
    : weight(init_normal(in, out, stddev, rng)), bias(Tensor::zeros(1, out, true)) {}

Tensor Linear::operator()(const Tensor& x) const { return numerics::add_row(numerics::matmul(x, weight), bias); }

void Linear::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".w", weight);
  fn(prefix + ".b", bias);
}

LayerNorm::LayerNorm(Index dim) : gain(Matrix::Ones(1, dim), true), bias(Tensor::zeros(1, dim, true)) {}

Tensor LayerNorm::operator()(const Tensor& x) const { return numerics::layer_norm(x, gain, bias); }

void LayerNorm::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".g", gain);
  fn(prefix + ".b", bias);
}

MultiHeadAttention::MultiHeadAttention(Index dim, Index h, Rng& rng)
    : heads(h), q(dim, dim, rng), k(dim, dim, rng), v(dim, dim, rng), out(dim, dim, rng) {
  if (h <= 0 || dim % h != 0) throw std::invalid_argument("model_dim must be divisible by heads");
}

Tensor MultiHeadAttention::operator()(const Tensor& query_input, const Tensor& key_input, const Tensor& value_input,
                                      const AttentionLayout& layout, const ForwardContext& ctx) const {
  const Tensor a = numerics::attention(q(query_input), k(key_input), v(value_input), heads, layout, ctx.attn_p(),
                                       ctx.rng);
  return out(a);
}

void MultiHeadAttention::visit(const std::string& prefix, const ParamVisitor& fn) {
  q.visit(prefix + ".q", fn);
  k.visit(prefix + ".k", fn);
  v.visit(prefix + ".v", fn);
  out.visit(prefix + ".o", fn);
}

FeedForward::FeedForward(Index dim, Index hidden, Rng& rng) : in(dim, hidden, rng), out(hidden, dim, rng) {}

Tensor FeedForward::operator()(const Tensor& x, const ForwardContext& ctx) const {
  return out(apply_dropout(numerics::gelu(in(x)), ctx));
}

void FeedForward::visit(const std::string& prefix, const ParamVisitor& fn) {
  in.visit(prefix + ".in", fn);
  out.visit(prefix + ".out", fn);
}

EncoderLayer::EncoderLayer(Index dim, Index heads, Index ff_dim, Rng& rng)
    : ln_attn(dim), ln_ff(dim), attn(dim, heads, rng), ff(dim, ff_dim, rng) {}

Tensor EncoderLayer::operator()(const Tensor& x, const AttentionLayout& layout, const ForwardContext& ctx) const {
  const Tensor n = ln_attn(x);
  Tensor h = x + apply_dropout(attn(n, n, n, layout, ctx), ctx);
  return h + apply_dropout(ff(ln_ff(h), ctx), ctx);
}

void EncoderLayer::visit(const std::string& prefix, const ParamVisitor& fn) {
  ln_attn.visit(prefix + ".ln_attn", fn);
  attn.visit(prefix + ".attn", fn);
  ln_ff.visit(prefix + ".ln_ff", fn);
  ff.visit(prefix + ".ff", fn);
}

}  // namespace biogen::model
