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

#include "biogen/model/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "biogen/log.hpp"

namespace biogen::model {

using numerics::AttentionBlock;
using numerics::AttentionLayout;
using numerics::Segment;

void EncoderConfig::validate() const {
  if (layers <= 0 || model_dim <= 0 || heads <= 0 || ff_dim <= 0 || max_positions <= 0) {
    throw std::invalid_argument("encoder dimensions must be positive");
  }
  if (model_dim % heads != 0) throw std::invalid_argument("encoder model_dim must be divisible by heads");
}

const char* query_mode_name(QueryMode mode) {
  switch (mode) {
    case QueryMode::kNameOnly: return "name_only";
    case QueryMode::kNameOccupation: return "name_occupation";
    case QueryMode::kFull: return "full";
  }
  return "full";
}

QueryMode parse_query_mode(const std::string& s) {
  if (s == "name_only") return QueryMode::kNameOnly;
  if (s == "name_occupation") return QueryMode::kNameOccupation;
  if (s == "full") return QueryMode::kFull;
  throw std::invalid_argument("unknown query mode: " + s);
}

TokenSeq query_tokens(const text::Vocabulary& vocab, const Query& query) {
  if (query.name.empty()) throw std::invalid_argument("query name must be non-empty");
  TokenSeq out = vocab.encode(query.name);
  if (query.mode == QueryMode::kNameOnly) return out;
  if (query.occupations.empty()) log::warn("query for '" + query.name + "' has no occupations");
  out.push_back(text::kSep);
  for (const auto& occ : query.occupations) {
    const auto ids = vocab.encode(occ);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  if (query.mode == QueryMode::kNameOccupation) return out;
  if (query.heading.empty()) throw std::invalid_argument("query heading must be non-empty");
  out.push_back(text::kSep);
  const auto ids = vocab.encode(query.heading);
  out.insert(out.end(), ids.begin(), ids.end());
  return out;
}

SentenceEncoder::SentenceEncoder(const EncoderConfig& config, Index vocab_size, Rng& rng) : config_(config) {
  config_.validate();
  const Index d = config_.model_dim;
  token_embedding_ = init_normal(vocab_size, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  position_embedding_ = init_normal(config_.max_positions, d, 0.02, rng);
  for (Index l = 0; l < config_.layers; ++l) layers_.emplace_back(d, config_.heads, config_.ff_dim, rng);
  final_ln_ = LayerNorm(d);
}

Tensor SentenceEncoder::encode(std::span<const TokenSeq> sentences, const ForwardContext& ctx) const {
  if (sentences.empty()) throw std::invalid_argument("encode: no sentences");
  std::vector<TokenId> ids;
  std::vector<TokenId> positions;
  std::vector<Segment> segments;
  AttentionLayout layout;
  for (const auto& s : sentences) {
    if (s.empty()) throw std::invalid_argument("encode: empty token sequence");
    Index n = static_cast<Index>(s.size());
    if (n > config_.max_positions) {
      log::warn("sentence of " + std::to_string(n) + " tokens truncated to " + std::to_string(config_.max_positions));
      n = config_.max_positions;
    }
    const Index begin = static_cast<Index>(ids.size());
    for (Index i = 0; i < n; ++i) {
      const TokenId t = s[static_cast<std::size_t>(i)];
      if (t < 0 || t >= vocab_size()) throw std::out_of_range("encode: token id out of range");
      ids.push_back(t);
      positions.push_back(static_cast<TokenId>(i));
    }
    segments.push_back(Segment{begin, n});
    layout.blocks.push_back(AttentionBlock{begin, n, begin, n, -1});
  }
  Tensor x = numerics::embedding(token_embedding_, ids) + numerics::embedding(position_embedding_, positions);
  x = apply_dropout(x, ctx);
  for (const auto& layer : layers_) x = layer(x, layout, ctx);
  return numerics::segment_mean(final_ln_(x), segments);
}

Tensor SentenceEncoder::encode_one(const TokenSeq& tokens, const ForwardContext& ctx) const {
  return encode(std::span<const TokenSeq>(&tokens, 1), ctx);
}

void SentenceEncoder::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".tok_emb", token_embedding_);
  fn(prefix + ".pos_emb", position_embedding_);
  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].visit(prefix + ".layer" + std::to_string(l), fn);
  final_ln_.visit(prefix + ".ln_final", fn);
}

}  // namespace biogen::model
