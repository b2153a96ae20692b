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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biogen/model/encoder.hpp"
#include "biogen/model/layers.hpp"

namespace biogen::model {

struct GeneratorConfig {
  Index enc_layers = 2;
  Index dec_layers = 2;
  Index model_dim = 64;
  Index heads = 4;
  Index ff_dim = 128;
  Index max_source = 256;
  Index max_target = 128;
  Index cache_size = 64;

  void validate() const;
  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

// Memory offsets 1..16 share one learned position, 17.. share another.
inline constexpr Index kNearMemoryOffset = 16;

// Previous-section decoder layer inputs, one [m, model_dim] block per layer.
// Always detached; an empty cache means no memory.
struct SectionCache {
  std::vector<Tensor> layers;

  bool empty() const { return layers.empty(); }
  Index size() const { return layers.empty() ? 0 : layers.front().rows(); }
};

// Generator input: query tokens, then SEP and the evidence sentences.
// `sentence_of[i]` is the evidence item the token came from, -1 for query
// and separator tokens.
struct Source {
  TokenSeq tokens;
  std::vector<Index> sentence_of;
  Index evidence_items = 0;
};

// Truncates evidence from the tail so that the result fits max_source; the
// query itself is never cut (a query longer than max_source is an error).
Source build_source(const TokenSeq& query, std::span<const TokenSeq> evidence, Index max_source);

struct DecodeConstraints {
  int beam_size = 5;
  std::optional<int> min_len;
  std::optional<int> max_len;
  double length_penalty = 0.0;

  void validate() const;
};

// Position in the `body NEXT_HEADING heading EOS` output grammar.
struct GrammarState {
  enum Phase { kBody, kHeading, kClosing, kDone };
  Phase phase = kBody;
  int body_len = 0;
  int heading_len = 0;  // END_ARTICLE counts as one heading token
  int generated = 0;

  void advance(TokenId token);
};

// Sets the logits of tokens the grammar or the length constraints forbid in
// `state` to -infinity.
void mask_logits(Eigen::Ref<Eigen::RowVectorXd> logits, const GrammarState& state, const DecodeConstraints& constraints);

struct SectionOutput {
  TokenSeq tokens;  // everything generated, EOS included when reached
  TokenSeq body;
  TokenSeq heading;
  bool end_article = false;  // heading was END_ARTICLE
  bool terminated = false;   // EOS reached within max_target
  double score = 0.0;
};

// Splits a generated sequence along the output grammar.
SectionOutput parse_output(const TokenSeq& tokens);

// Decoder target for one section: body NEXT_HEADING next_heading EOS, with
// END_ARTICLE as the heading of the final section. The body is cut when the
// whole target would exceed max_target.
TokenSeq make_target(const TokenSeq& body, const std::optional<TokenSeq>& next_heading, Index max_target);

// BOS followed by all but the last target token.
TokenSeq decoder_input(const TokenSeq& target);

struct DecoderLayer {
  LayerNorm ln_self, ln_cross, ln_ff;
  MultiHeadAttention self_attn, cross_attn;
  FeedForward ff;

  DecoderLayer() = default;
  DecoderLayer(Index dim, Index heads, Index ff_dim, Rng& rng);
  void visit(const std::string& prefix, const ParamVisitor& fn);
};

struct ForwardResult {
  Tensor logits;                    // [target_len, vocab]
  std::vector<Tensor> layer_inputs;  // per decoder layer, [target_len, d]
};

class Generator {
 public:
  Generator() = default;
  Generator(const GeneratorConfig& config, Index vocab_size, Rng& rng);

  const GeneratorConfig& config() const { return config_; }
  Index vocab_size() const { return embedding_.rows(); }

  // `weights` is [1, evidence_items] (or undefined for uniform weights);
  // evidence token embeddings are scaled by evidence_items * weight, so a
  // uniform distribution leaves them unchanged.
  Tensor encode_source(const Source& source, const Tensor& weights, const ForwardContext& ctx = {}) const;

  // Teacher-forced pass. `input` starts with BOS.
  ForwardResult forward(const Source& source, const Tensor& weights, const TokenSeq& input, const SectionCache& cache,
                        const ForwardContext& ctx = {}) const;
  ForwardResult forward_encoded(const Tensor& encoded, const TokenSeq& input, const SectionCache& cache,
                                const ForwardContext& ctx = {}) const;

  // Last `cache_size` rows of every layer input, detached.
  SectionCache make_cache(const std::vector<Tensor>& layer_inputs) const;

  SectionOutput generate(const Source& source, const Tensor& weights, const SectionCache& cache,
                         const DecodeConstraints& constraints) const;

  void visit(const std::string& prefix, const ParamVisitor& fn);

  class Session;

 private:
  Tensor memory_positions(Index rows) const;

  GeneratorConfig config_;
  Tensor embedding_;
  Tensor output_bias_;
  Tensor source_positions_;
  Tensor target_positions_;
  Tensor memory_embedding_;
  std::vector<EncoderLayer> encoder_layers_;
  LayerNorm encoder_ln_;
  std::vector<DecoderLayer> decoder_layers_;
  LayerNorm decoder_ln_;
};

// Incremental decoding over a fixed source and cache.
class Generator::Session {
 public:
  struct State {
    std::vector<Tensor> keys, values;  // per layer, memory rows first
    Index position = 0;
  };

  Session(const Generator& g, const Source& source, const Tensor& weights, const SectionCache& cache);

  State initial_state() const;
  // Feeds `token` at the state's position and returns next-token logits.
  Eigen::RowVectorXd step(State& state, TokenId token) const;

 private:
  const Generator& g_;
  std::vector<Tensor> cross_keys_, cross_values_;
  std::vector<Tensor> memory_keys_, memory_values_;
};

}  // namespace biogen::model
