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

#include "biogen/model/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biogen/log.hpp"
#include "biogen/numerics/kernels.hpp"

namespace biogen::model {

namespace ops = numerics;
using numerics::AttentionLayout;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tensor positions_for(const Tensor& table, Index begin, Index count) {
  if (begin + count > table.rows()) throw std::out_of_range("sequence longer than the position table");
  return ops::slice_rows(table, begin, count);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (enc_layers <= 0 || dec_layers <= 0 || model_dim <= 0 || heads <= 0 || ff_dim <= 0) {
    throw std::invalid_argument("generator dimensions must be positive");
  }
  if (model_dim % heads != 0) throw std::invalid_argument("generator model_dim must be divisible by heads");
  if (max_source <= 0 || max_target < 2) throw std::invalid_argument("generator length limits too small");
  if (cache_size < 0) throw std::invalid_argument("cache_size must be non-negative");
}

Source build_source(const TokenSeq& query, std::span<const TokenSeq> evidence, Index max_source) {
  if (static_cast<Index>(query.size()) > max_source) {
    throw std::invalid_argument("query of " + std::to_string(query.size()) + " tokens exceeds max_source");
  }
  Source s;
  s.tokens = query;
  s.sentence_of.assign(query.size(), -1);
  s.evidence_items = static_cast<Index>(evidence.size());
  if (evidence.empty()) return s;
  s.tokens.push_back(text::kSep);
  s.sentence_of.push_back(-1);
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    for (TokenId t : evidence[i]) {
      if (static_cast<Index>(s.tokens.size()) >= max_source) break;
      s.tokens.push_back(t);
      s.sentence_of.push_back(static_cast<Index>(i));
    }
  }
  if (static_cast<Index>(s.tokens.size()) > max_source) {  // the separator itself did not fit
    s.tokens.resize(static_cast<std::size_t>(max_source));
    s.sentence_of.resize(static_cast<std::size_t>(max_source));
  }
  return s;
}

void DecodeConstraints::validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be at least 1");
  if (max_len && *max_len < 2) throw std::invalid_argument("max_len must allow a body and a heading token");
  if (min_len && *min_len < 0) throw std::invalid_argument("min_len must be non-negative");
  if (min_len && max_len && *min_len > *max_len) throw std::invalid_argument("min_len exceeds max_len");
  if (length_penalty < 0.0) throw std::invalid_argument("length_penalty must be non-negative");
}

void GrammarState::advance(TokenId token) {
  ++generated;
  switch (phase) {
    case kBody:
      if (token == text::kNextHeading) {
        phase = kHeading;
      } else {
        ++body_len;
      }
      break;
    case kHeading:
      if (token == text::kEos) {
        phase = kDone;
      } else if (token == text::kEndArticle) {
        ++heading_len;
        phase = kClosing;
      } else {
        ++heading_len;
      }
      break;
    case kClosing:
      phase = kDone;
      break;
    case kDone:
      break;
  }
}

void mask_logits(Eigen::Ref<Eigen::RowVectorXd> logits, const GrammarState& s, const DecodeConstraints& c) {
  const int content = s.body_len + s.heading_len;
  TokenId forced = -1;
  if (s.phase == GrammarState::kBody && c.max_len && s.body_len >= *c.max_len - 1) forced = text::kNextHeading;
  if (s.phase == GrammarState::kHeading && c.max_len && content >= *c.max_len) forced = text::kEos;
  if (s.phase == GrammarState::kClosing || s.phase == GrammarState::kDone) forced = text::kEos;
  if (forced >= 0) {
    const double kept = logits(forced);
    logits.setConstant(kNegInf);
    logits(forced) = kept;
    return;
  }
  logits(text::kPad) = kNegInf;
  logits(text::kBos) = kNegInf;
  logits(text::kSep) = kNegInf;
  if (s.phase == GrammarState::kBody) {
    logits(text::kEos) = kNegInf;
    logits(text::kEndArticle) = kNegInf;
    if (s.body_len == 0) logits(text::kNextHeading) = kNegInf;
  } else {
    logits(text::kNextHeading) = kNegInf;
    if (s.heading_len > 0 || (c.min_len && s.body_len + 1 < *c.min_len)) logits(text::kEndArticle) = kNegInf;
    if (s.heading_len == 0 || (c.min_len && content < *c.min_len)) logits(text::kEos) = kNegInf;
  }
}

SectionOutput parse_output(const TokenSeq& tokens) {
  SectionOutput out;
  out.tokens = tokens;
  bool heading = false;
  for (TokenId t : tokens) {
    if (t == text::kEos) {
      out.terminated = true;
      break;
    }
    if (!heading && t == text::kNextHeading) {
      heading = true;
      continue;
    }
    if (heading && t == text::kEndArticle) {
      out.end_article = true;
      continue;
    }
    (heading ? out.heading : out.body).push_back(t);
  }
  return out;
}

TokenSeq make_target(const TokenSeq& body, const std::optional<TokenSeq>& next_heading, Index max_target) {
  TokenSeq tail{text::kNextHeading};
  if (next_heading) {
    tail.insert(tail.end(), next_heading->begin(), next_heading->end());
  } else {
    tail.push_back(text::kEndArticle);
  }
  tail.push_back(text::kEos);
  if (static_cast<Index>(tail.size()) >= max_target) throw std::invalid_argument("heading does not fit max_target");
  const std::size_t room = static_cast<std::size_t>(max_target) - tail.size();
  TokenSeq out(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(std::min(room, body.size())));
  if (out.size() < body.size()) log::debug("section body truncated to fit max_target");
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

TokenSeq decoder_input(const TokenSeq& target) {
  TokenSeq in{text::kBos};
  if (!target.empty()) in.insert(in.end(), target.begin(), target.end() - 1);
  return in;
}

DecoderLayer::DecoderLayer(Index dim, Index heads, Index ff_dim, Rng& rng)
    : ln_self(dim), ln_cross(dim), ln_ff(dim), self_attn(dim, heads, rng), cross_attn(dim, heads, rng),
      ff(dim, ff_dim, rng) {}

void DecoderLayer::visit(const std::string& prefix, const ParamVisitor& fn) {
  ln_self.visit(prefix + ".ln_self", fn);
  self_attn.visit(prefix + ".self_attn", fn);
  ln_cross.visit(prefix + ".ln_cross", fn);
  cross_attn.visit(prefix + ".cross_attn", fn);
  ln_ff.visit(prefix + ".ln_ff", fn);
  ff.visit(prefix + ".ff", fn);
}

Generator::Generator(const GeneratorConfig& config, Index vocab_size, Rng& rng) : config_(config) {
  config_.validate();
  const Index d = config_.model_dim;
  embedding_ = init_normal(vocab_size, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  output_bias_ = Tensor::zeros(1, vocab_size, true);
  source_positions_ = init_normal(config_.max_source, d, 0.02, rng);
  target_positions_ = init_normal(config_.max_target, d, 0.02, rng);
  memory_embedding_ = init_normal(2, d, 0.02, rng);
  for (Index l = 0; l < config_.enc_layers; ++l) encoder_layers_.emplace_back(d, config_.heads, config_.ff_dim, rng);
  encoder_ln_ = LayerNorm(d);
  for (Index l = 0; l < config_.dec_layers; ++l) decoder_layers_.emplace_back(d, config_.heads, config_.ff_dim, rng);
  decoder_ln_ = LayerNorm(d);
}

Tensor Generator::encode_source(const Source& source, const Tensor& weights, const ForwardContext& ctx) const {
  const Index n = static_cast<Index>(source.tokens.size());
  if (n == 0) throw std::invalid_argument("empty generator source");
  if (n > config_.max_source) throw std::invalid_argument("source exceeds max_source");
  Tensor x = ops::embedding(embedding_, source.tokens);
  if (weights.defined() && source.evidence_items > 0) {
    if (weights.numel() != source.evidence_items) throw numerics::ShapeError("evidence weight count mismatch");
    const Tensor scaled = ops::scale(weights, static_cast<double>(source.evidence_items));
    x = ops::scale_rows(x, ops::expand_to_rows(scaled, source.sentence_of, 1.0));
  }
  x = apply_dropout(x + positions_for(source_positions_, 0, n), ctx);
  const auto layout = AttentionLayout::full(n, n);
  for (const auto& layer : encoder_layers_) x = layer(x, layout, ctx);
  return encoder_ln_(x);
}

Tensor Generator::memory_positions(Index rows) const {
  std::vector<TokenId> buckets(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) buckets[static_cast<std::size_t>(r)] = rows - r <= kNearMemoryOffset ? 0 : 1;
  return ops::embedding(memory_embedding_, buckets);
}

ForwardResult Generator::forward(const Source& source, const Tensor& weights, const TokenSeq& input,
                                 const SectionCache& cache, const ForwardContext& ctx) const {
  return forward_encoded(encode_source(source, weights, ctx), input, cache, ctx);
}

ForwardResult Generator::forward_encoded(const Tensor& encoded, const TokenSeq& input, const SectionCache& cache,
                                         const ForwardContext& ctx) const {
  const Index t = static_cast<Index>(input.size());
  if (t == 0) throw std::invalid_argument("decoder input must start with BOS");
  if (t > config_.max_target) throw std::invalid_argument("decoder input exceeds max_target");
  if (!cache.empty() && static_cast<Index>(cache.layers.size()) != config_.dec_layers) {
    throw std::invalid_argument("cache layer count does not match the decoder");
  }
  const Index m = cache.size();
  const Tensor mem_pos = m > 0 ? memory_positions(m) : Tensor();
  const auto self_layout = AttentionLayout::causal_with_memory(t, m);
  const auto cross_layout = AttentionLayout::full(t, encoded.rows());

  ForwardResult result;
  Tensor h = apply_dropout(ops::embedding(embedding_, input) + positions_for(target_positions_, 0, t), ctx);
  for (std::size_t l = 0; l < decoder_layers_.size(); ++l) {
    const auto& layer = decoder_layers_[l];
    result.layer_inputs.push_back(h);
    const Tensor x = layer.ln_self(h);
    Tensor key_in = x, value_in = x;
    if (m > 0) {
      const Tensor mem = layer.ln_self(numerics::detach(cache.layers[l]));
      const Tensor k_parts[] = {mem + mem_pos, x};
      const Tensor v_parts[] = {mem, x};
      key_in = ops::concat_rows(k_parts);
      value_in = ops::concat_rows(v_parts);
    }
    h = h + apply_dropout(layer.self_attn(x, key_in, value_in, self_layout, ctx), ctx);
    h = h + apply_dropout(layer.cross_attn(layer.ln_cross(h), encoded, encoded, cross_layout, ctx), ctx);
    h = h + apply_dropout(layer.ff(layer.ln_ff(h), ctx), ctx);
  }
  result.logits = ops::add_row(ops::matmul_nt(decoder_ln_(h), embedding_), output_bias_);
  return result;
}

SectionCache Generator::make_cache(const std::vector<Tensor>& layer_inputs) const {
  SectionCache cache;
  if (config_.cache_size == 0 || layer_inputs.empty()) return cache;
  for (const auto& h : layer_inputs) {
    const Index keep = std::min(config_.cache_size, h.rows());
    cache.layers.push_back(numerics::detach(ops::slice_rows(h, h.rows() - keep, keep)));
  }
  return cache;
}

Generator::Session::Session(const Generator& g, const Source& source, const Tensor& weights,
                            const SectionCache& cache)
    : g_(g) {
  numerics::NoGradGuard guard;
  const Tensor encoded = g.encode_source(source, weights);
  const Index m = cache.size();
  if (!cache.empty() && static_cast<Index>(cache.layers.size()) != g.config_.dec_layers) {
    throw std::invalid_argument("cache layer count does not match the decoder");
  }
  const Tensor mem_pos = m > 0 ? g.memory_positions(m) : Tensor();
  for (std::size_t l = 0; l < g.decoder_layers_.size(); ++l) {
    const auto& layer = g.decoder_layers_[l];
    cross_keys_.push_back(layer.cross_attn.k(encoded));
    cross_values_.push_back(layer.cross_attn.v(encoded));
    if (m > 0) {
      const Tensor mem = layer.ln_self(cache.layers[l]);
      memory_keys_.push_back(layer.self_attn.k(mem + mem_pos));
      memory_values_.push_back(layer.self_attn.v(mem));
    }
  }
}

Generator::Session::State Generator::Session::initial_state() const {
  State s;
  s.keys = memory_keys_;
  s.values = memory_values_;
  s.keys.resize(g_.decoder_layers_.size());
  s.values.resize(g_.decoder_layers_.size());
  return s;
}

Eigen::RowVectorXd Generator::Session::step(State& state, TokenId token) const {
  numerics::NoGradGuard guard;
  const TokenId ids[] = {token};
  Tensor h = ops::embedding(g_.embedding_, ids) + positions_for(g_.target_positions_, state.position, 1);
  for (std::size_t l = 0; l < g_.decoder_layers_.size(); ++l) {
    const auto& layer = g_.decoder_layers_[l];
    const Tensor x = layer.ln_self(h);
    const Tensor k = layer.self_attn.k(x);
    const Tensor v = layer.self_attn.v(x);
    if (state.keys[l].defined()) {
      const Tensor kp[] = {state.keys[l], k};
      const Tensor vp[] = {state.values[l], v};
      state.keys[l] = ops::concat_rows(kp);
      state.values[l] = ops::concat_rows(vp);
    } else {
      state.keys[l] = k;
      state.values[l] = v;
    }
    const auto self_layout = AttentionLayout::full(1, state.keys[l].rows());
    h = h + layer.self_attn.out(
                ops::attention(layer.self_attn.q(x), state.keys[l], state.values[l], layer.self_attn.heads, self_layout));
    const auto cross_layout = AttentionLayout::full(1, cross_keys_[l].rows());
    h = h + layer.cross_attn.out(ops::attention(layer.cross_attn.q(layer.ln_cross(h)), cross_keys_[l],
                                                cross_values_[l], layer.cross_attn.heads, cross_layout));
    h = h + layer.ff(layer.ln_ff(h), ForwardContext{});
  }
  ++state.position;
  const Tensor logits = ops::add_row(ops::matmul_nt(g_.decoder_ln_(h), g_.embedding_), g_.output_bias_);
  return logits.value().row(0);
}

namespace {

struct Hypothesis {
  TokenSeq tokens;
  double score = 0.0;
  GrammarState grammar;
  Generator::Session::State state;
};

struct Candidate {
  double score;
  std::size_t parent;
  TokenId token;
};

double normalized(double score, std::size_t length, double penalty) {
  if (penalty == 0.0) return score;
  return score / std::pow(static_cast<double>(std::max<std::size_t>(length, 1)), penalty);
}

}  // namespace

SectionOutput Generator::generate(const Source& source, const Tensor& weights, const SectionCache& cache,
                                  const DecodeConstraints& constraints) const {
  constraints.validate();
  const Session session(*this, source, weights, cache);
  const std::size_t beam = static_cast<std::size_t>(constraints.beam_size);
  std::vector<Hypothesis> live(1);
  live[0].state = session.initial_state();
  std::vector<Hypothesis> finished;

  for (Index step = 0; step < config_.max_target && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < live.size(); ++b) {
      auto& hyp = live[b];
      const TokenId last = hyp.tokens.empty() ? text::kBos : hyp.tokens.back();
      Eigen::RowVectorXd logits = session.step(hyp.state, last);
      mask_logits(logits, hyp.grammar, constraints);
      const Matrix lp = numerics::log_softmax_rows(Matrix(logits));
      for (Index v = 0; v < lp.cols(); ++v) {
        if (std::isfinite(lp(0, v))) candidates.push_back({hyp.score + lp(0, v), b, static_cast<TokenId>(v)});
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    std::vector<Hypothesis> next;
    for (const auto& c : candidates) {
      if (next.size() == beam) break;
      Hypothesis h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.score = c.score;
      h.grammar = live[c.parent].grammar;
      h.grammar.advance(c.token);
      if (c.token == text::kEos) {
        if (finished.size() < beam) finished.push_back(std::move(h));
      } else {
        h.state = live[c.parent].state;
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (finished.size() >= beam) break;
    if (constraints.length_penalty == 0.0 && !finished.empty() && !live.empty()) {
      double best_finished = kNegInf;
      for (const auto& f : finished) best_finished = std::max(best_finished, f.score);
      if (best_finished >= live.front().score) break;
    }
  }

  const Hypothesis* best = nullptr;
  double best_score = kNegInf;
  for (const auto& f : finished) {
    const double s = normalized(f.score, f.tokens.size(), constraints.length_penalty);
    if (!best || s > best_score) {
      best = &f;
      best_score = s;
    }
  }
  if (!best) {
    log::warn("decoder reached max_target without EOS; section forcibly stopped");
    best = &live.front();
  }
  SectionOutput out = parse_output(best->tokens);
  out.score = best->score;
  return out;
}

void Generator::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".embedding", embedding_);
  fn(prefix + ".output_bias", output_bias_);
  fn(prefix + ".source_pos", source_positions_);
  fn(prefix + ".target_pos", target_positions_);
  fn(prefix + ".memory_pos", memory_embedding_);
  for (std::size_t l = 0; l < encoder_layers_.size(); ++l) {
    encoder_layers_[l].visit(prefix + ".enc" + std::to_string(l), fn);
  }
  encoder_ln_.visit(prefix + ".enc_ln", fn);
  for (std::size_t l = 0; l < decoder_layers_.size(); ++l) {
    decoder_layers_[l].visit(prefix + ".dec" + std::to_string(l), fn);
  }
  decoder_ln_.visit(prefix + ".dec_ln", fn);
}

}  // namespace biogen::model
