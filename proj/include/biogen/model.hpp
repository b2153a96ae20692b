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

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biogen/model/encoder.hpp"
#include "biogen/model/generator.hpp"
#include "biogen/retriever.hpp"
#include "biogen/text/text.hpp"

namespace biogen {

enum class Granularity { kSectionBySection, kWholeArticle };

const char* granularity_name(Granularity g);
Granularity parse_granularity(const std::string& s);

struct ModelConfig {
  model::EncoderConfig encoder;
  model::GeneratorConfig generator;
  retriever::RetrievalConfig retrieval = retriever::RetrievalConfig::desk();
  // Token budget of the baseline_truncate strategy.
  int baseline_tokens = 100;
  model::QueryMode query_mode = model::QueryMode::kFull;
  Granularity granularity = Granularity::kSectionBySection;
  bool tied_encoders = true;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

class ModelMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sentence encoder(s), generator and the vocabulary they were built for.
struct Model {
  ModelConfig config;
  text::Vocabulary vocab;
  model::SentenceEncoder encoder;
  std::optional<model::SentenceEncoder> query_encoder;  // only when encoders are untied
  model::Generator generator;

  static Model create(const ModelConfig& config, text::Vocabulary vocab, std::uint64_t seed);

  const model::SentenceEncoder& query_side() const { return query_encoder ? *query_encoder : encoder; }

  // Every parameter with its checkpoint name, in a fixed order.
  void visit(const model::ParamVisitor& fn);
  std::vector<model::NamedParam> parameters();
  Index parameter_count();

  Model clone() const;

  // Throws ModelMismatch when embedding tables disagree with the vocabulary.
  void check_vocab() const;
};

// Sentence embeddings for a pool: [sentences, d], undefined for an empty pool.
numerics::Tensor encode_pool(const Model& m, const retriever::EvidencePool& pool,
                             const model::ForwardContext& ctx = {});

// Retrieval for one query with the model's configured strategy and query
// mode. `sentence_embeddings` may come from encode_pool (computed on demand
// when undefined). Throws EmptyEvidence for flat/two-stage on an empty pool.
retriever::RetrievedEvidence retrieve(const Model& m, const retriever::EvidencePool& pool, model::Query query,
                                      numerics::Tensor sentence_embeddings = {},
                                      const model::ForwardContext& ctx = {});

// Generator source. The generator always sees the full query, whatever mode
// retrieval used.
model::Source make_source(const Model& m, model::Query query, const retriever::RetrievedEvidence& evidence);

}  // namespace biogen
