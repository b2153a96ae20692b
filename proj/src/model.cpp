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

#include "biogen/model.hpp"

#include "biogen/numerics/ops.hpp"

namespace biogen {

using nlohmann::json;

const char* granularity_name(Granularity g) {
  return g == Granularity::kWholeArticle ? "whole_article" : "section_by_section";
}

Granularity parse_granularity(const std::string& s) {
  if (s == "section_by_section") return Granularity::kSectionBySection;
  if (s == "whole_article") return Granularity::kWholeArticle;
  throw std::invalid_argument("unknown granularity: " + s);
}

void ModelConfig::validate() const {
  encoder.validate();
  generator.validate();
  retrieval.validate();
  if (baseline_tokens <= 0) throw std::invalid_argument("baseline_tokens must be positive");
}

json to_json(const ModelConfig& c) {
  return json{
      {"encoder",
       {{"layers", c.encoder.layers},
        {"model_dim", c.encoder.model_dim},
        {"heads", c.encoder.heads},
        {"ff_dim", c.encoder.ff_dim},
        {"max_positions", c.encoder.max_positions}}},
      {"generator",
       {{"enc_layers", c.generator.enc_layers},
        {"dec_layers", c.generator.dec_layers},
        {"model_dim", c.generator.model_dim},
        {"heads", c.generator.heads},
        {"ff_dim", c.generator.ff_dim},
        {"max_source", c.generator.max_source},
        {"max_target", c.generator.max_target},
        {"cache_size", c.generator.cache_size}}},
      {"retrieval",
       {{"top_k_sentences", c.retrieval.top_k},
        {"max_words", c.retrieval.max_words},
        {"temperature", c.retrieval.temperature},
        {"strategy", retriever::strategy_name(c.retrieval.strategy)}}},
      {"baseline_tokens", c.baseline_tokens},
      {"query_mode", model::query_mode_name(c.query_mode)},
      {"granularity", granularity_name(c.granularity)},
      {"tied_encoders", c.tied_encoders},
  };
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  const auto& e = j.at("encoder");
  c.encoder.layers = e.at("layers").get<Index>();
  c.encoder.model_dim = e.at("model_dim").get<Index>();
  c.encoder.heads = e.at("heads").get<Index>();
  c.encoder.ff_dim = e.at("ff_dim").get<Index>();
  c.encoder.max_positions = e.at("max_positions").get<Index>();
  const auto& g = j.at("generator");
  c.generator.enc_layers = g.at("enc_layers").get<Index>();
  c.generator.dec_layers = g.at("dec_layers").get<Index>();
  c.generator.model_dim = g.at("model_dim").get<Index>();
  c.generator.heads = g.at("heads").get<Index>();
  c.generator.ff_dim = g.at("ff_dim").get<Index>();
  c.generator.max_source = g.at("max_source").get<Index>();
  c.generator.max_target = g.at("max_target").get<Index>();
  c.generator.cache_size = g.at("cache_size").get<Index>();
  const auto& r = j.at("retrieval");
  c.retrieval.top_k = r.at("top_k_sentences").get<int>();
  c.retrieval.max_words = r.at("max_words").get<int>();
  c.retrieval.temperature = r.at("temperature").get<double>();
  c.retrieval.strategy = retriever::parse_strategy(r.at("strategy").get<std::string>());
  c.baseline_tokens = j.at("baseline_tokens").get<int>();
  c.query_mode = model::parse_query_mode(j.at("query_mode").get<std::string>());
  c.granularity = parse_granularity(j.at("granularity").get<std::string>());
  c.tied_encoders = j.at("tied_encoders").get<bool>();
  c.validate();
  return c;
}

Model Model::create(const ModelConfig& config, text::Vocabulary vocab, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config = config;
  m.vocab = std::move(vocab);
  const Index v = static_cast<Index>(m.vocab.size());
  Rng rng(seed);
  m.encoder = model::SentenceEncoder(config.encoder, v, rng);
  if (!config.tied_encoders) m.query_encoder = model::SentenceEncoder(config.encoder, v, rng);
  m.generator = model::Generator(config.generator, v, rng);
  return m;
}

void Model::visit(const model::ParamVisitor& fn) {
  encoder.visit("encoder", fn);
  if (query_encoder) query_encoder->visit("query_encoder", fn);
  generator.visit("generator", fn);
}

std::vector<model::NamedParam> Model::parameters() {
  std::vector<model::NamedParam> out;
  visit([&](const std::string& name, numerics::Tensor& t) { out.push_back({name, t}); });
  return out;
}

Index Model::parameter_count() {
  Index n = 0;
  visit([&](const std::string&, numerics::Tensor& t) { n += t.numel(); });
  return n;
}

Model Model::clone() const {
  Model copy = *this;
  copy.visit([](const std::string&, numerics::Tensor& t) { t = t.clone(); });
  return copy;
}

void Model::check_vocab() const {
  const Index v = static_cast<Index>(vocab.size());
  if (encoder.vocab_size() != v || query_side().vocab_size() != v || generator.vocab_size() != v) {
    throw ModelMismatch("model embedding tables do not match the vocabulary size " + std::to_string(v));
  }
}

numerics::Tensor encode_pool(const Model& m, const retriever::EvidencePool& pool, const model::ForwardContext& ctx) {
  if (pool.sentences.empty()) return {};
  const auto tokens = pool.sentence_tokens();
  return m.encoder.encode(tokens, ctx);
}

retriever::RetrievedEvidence retrieve(const Model& m, const retriever::EvidencePool& pool, model::Query query,
                                      numerics::Tensor sentence_embeddings, const model::ForwardContext& ctx) {
  const auto& rc = m.config.retrieval;
  if (rc.strategy == retriever::Strategy::kBaselineTruncate) return retriever::baseline_truncate(pool, m.config.baseline_tokens);
  if (pool.sentences.empty()) throw retriever::EmptyEvidence();
  query.mode = m.config.query_mode;
  if (!sentence_embeddings.defined()) sentence_embeddings = encode_pool(m, pool, ctx);
  const auto q = m.query_side().encode_one(model::query_tokens(m.vocab, query), ctx);
  return retriever::select(retriever::score(q, sentence_embeddings), pool, rc);
}

model::Source make_source(const Model& m, model::Query query, const retriever::RetrievedEvidence& evidence) {
  query.mode = model::QueryMode::kFull;
  const auto tokens = evidence.tokens();
  return model::build_source(model::query_tokens(m.vocab, query), tokens, m.config.generator.max_source);
}

}  // namespace biogen
