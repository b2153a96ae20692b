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

#include <span>
#include <string>
#include <vector>

#include "biogen/model/layers.hpp"
#include "biogen/text/text.hpp"

namespace biogen::model {

using text::TokenId;
using TokenSeq = std::vector<TokenId>;

struct EncoderConfig {
  Index layers = 2;
  Index model_dim = 64;
  Index heads = 4;
  Index ff_dim = 128;
  Index max_positions = 128;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

enum class QueryMode { kNameOnly, kNameOccupation, kFull };

const char* query_mode_name(QueryMode mode);
QueryMode parse_query_mode(const std::string& s);

struct Query {
  std::string name;
  std::vector<std::string> occupations;
  std::string heading;
  QueryMode mode = QueryMode::kFull;
};

// `name SEP occ... SEP heading`, with the components the mode drops removed.
TokenSeq query_tokens(const text::Vocabulary& vocab, const Query& query);

// Micro transformer with mean pooling over the final (normalised) states.
class SentenceEncoder {
 public:
  SentenceEncoder() = default;
  SentenceEncoder(const EncoderConfig& config, Index vocab_size, Rng& rng);

  const EncoderConfig& config() const { return config_; }
  Index vocab_size() const { return token_embedding_.rows(); }

  // One row per sentence: [n, model_dim]. Sentences are encoded
  // independently even though they share one batched pass.
  Tensor encode(std::span<const TokenSeq> sentences, const ForwardContext& ctx = {}) const;
  Tensor encode_one(const TokenSeq& tokens, const ForwardContext& ctx = {}) const;

  void visit(const std::string& prefix, const ParamVisitor& fn);

 private:
  EncoderConfig config_;
  Tensor token_embedding_;
  Tensor position_embedding_;
  std::vector<EncoderLayer> layers_;
  LayerNorm final_ln_;
};

}  // namespace biogen::model
