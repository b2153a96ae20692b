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

#include "biogen/retriever.hpp"

#include <algorithm>
#include <numeric>

#include "biogen/log.hpp"
#include "biogen/numerics/ops.hpp"

namespace biogen::retriever {

namespace ops = numerics;

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kFlat: return "flat";
    case Strategy::kTwoStage: return "two_stage";
    case Strategy::kBaselineTruncate: return "baseline_truncate";
  }
  return "flat";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "flat") return Strategy::kFlat;
  if (s == "two_stage") return Strategy::kTwoStage;
  if (s == "baseline_truncate") return Strategy::kBaselineTruncate;
  throw std::invalid_argument("unknown retrieval strategy: " + s);
}

RetrievalConfig RetrievalConfig::desk() {
  RetrievalConfig c;
  c.top_k = 3;
  c.max_words = 75;
  return c;
}

void RetrievalConfig::validate() const {
  if (top_k <= 0) throw std::invalid_argument("top_k_sentences must be positive");
  if (max_words <= 0) throw std::invalid_argument("max_words must be positive");
  if (!(temperature > 0.0)) throw std::invalid_argument("retrieval temperature must be positive");
}

std::vector<TokenSeq> EvidencePool::sentence_tokens() const {
  std::vector<TokenSeq> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.tokens);
  return out;
}

EvidencePool build_pool(const text::Vocabulary& vocab, std::span<const corpus::EvidenceDocument> hits,
                        Index max_sentence_tokens) {
  EvidencePool pool;
  std::size_t truncated = 0;
  for (const auto& doc : hits) {
    pool.documents.emplace_back(doc.doc_index, vocab.encode(doc.text));
    int index = 0;
    for (const auto& sentence : text::sentence_split(doc.text)) {
      CandidateSentence c;
      c.doc_index = doc.doc_index;
      c.sentence_index = index++;
      c.words = static_cast<int>(text::word_count(sentence));
      c.tokens = vocab.encode(sentence);
      if (c.tokens.empty()) continue;
      if (static_cast<Index>(c.tokens.size()) > max_sentence_tokens) {
        c.tokens.resize(static_cast<std::size_t>(max_sentence_tokens));
        ++truncated;
      }
      pool.sentences.push_back(std::move(c));
    }
  }
  if (truncated) log::warn(std::to_string(truncated) + " evidence sentences truncated to the encoder limit");
  return pool;
}

std::vector<TokenSeq> RetrievedEvidence::tokens() const {
  std::vector<TokenSeq> out;
  out.reserve(items.size());
  for (const auto& i : items) out.push_back(i.tokens);
  return out;
}

Tensor score(const Tensor& query, const Tensor& sentences) {
  if (query.rows() != 1) throw numerics::ShapeError("score: query must be a single row");
  if (query.cols() != sentences.cols()) {
    throw numerics::ShapeError("score: query width " + std::to_string(query.cols()) + " != sentence width " +
                               std::to_string(sentences.cols()));
  }
  return ops::matmul_nt(query, sentences);
}

std::vector<std::size_t> select_indices(std::span<const ScoredCandidate> candidates, int top_k, int max_words) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = candidates[a];
    const auto& y = candidates[b];
    if (x.score != y.score) return x.score > y.score;
    if (x.doc_index != y.doc_index) return x.doc_index < y.doc_index;
    return x.sentence_index < y.sentence_index;
  });
  std::vector<std::size_t> chosen;
  int words = 0;
  for (std::size_t i : order) {
    if (static_cast<int>(chosen.size()) >= top_k) break;
    if (words + candidates[i].words > max_words) continue;
    words += candidates[i].words;
    chosen.push_back(i);
  }
  return chosen;
}

int best_document(std::span<const ScoredCandidate> candidates) {
  if (candidates.empty()) throw EmptyEvidence();
  const ScoredCandidate* best = &candidates[0];
  for (const auto& c : candidates) {
    if (c.score > best->score || (c.score == best->score && c.doc_index < best->doc_index)) best = &c;
  }
  return best->doc_index;
}

RetrievedEvidence select(const Tensor& scores, const EvidencePool& pool, const RetrievalConfig& config) {
  config.validate();
  if (pool.sentences.empty()) throw EmptyEvidence();
  const Index n = static_cast<Index>(pool.sentences.size());
  if (scores.rows() != 1 || scores.cols() != n) throw numerics::ShapeError("select: one score per pool sentence");

  std::vector<ScoredCandidate> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto& s = pool.sentences[static_cast<std::size_t>(i)];
    all[static_cast<std::size_t>(i)] = {scores.value()(0, i), s.doc_index, s.sentence_index, s.words};
  }
  std::vector<std::size_t> position(all.size());
  std::iota(position.begin(), position.end(), std::size_t{0});
  if (config.strategy == Strategy::kTwoStage) {
    const int doc = best_document(all);
    std::vector<ScoredCandidate> within;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].doc_index == doc) {
        within.push_back(all[i]);
        kept.push_back(i);
      }
    }
    all = std::move(within);
    position = std::move(kept);
  } else if (config.strategy != Strategy::kFlat) {
    throw std::invalid_argument("select: strategy must be flat or two_stage");
  }

  const auto chosen = select_indices(all, config.top_k, config.max_words);
  if (chosen.empty()) throw EmptyEvidence();
  std::vector<Index> cols;
  cols.reserve(chosen.size());
  for (std::size_t c : chosen) cols.push_back(static_cast<Index>(position[c]));

  RetrievedEvidence ev;
  ev.soft_weights = ops::softmax(ops::gather_cols(scores, cols), config.temperature);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& s = pool.sentences[static_cast<std::size_t>(cols[j])];
    EvidenceItem item;
    item.tokens = s.tokens;
    item.doc_index = s.doc_index;
    item.sentence_index = s.sentence_index;
    item.words = s.words;
    item.score = scores.value()(0, cols[j]);
    item.weight = ev.soft_weights.value()(0, static_cast<Index>(j));
    ev.total_words += s.words;
    ev.items.push_back(std::move(item));
  }
  return ev;
}

RetrievedEvidence baseline_truncate(const EvidencePool& pool, int max_tokens) {
  if (max_tokens <= 0) throw std::invalid_argument("baseline_truncate: max_tokens must be positive");
  RetrievedEvidence ev;
  int remaining = max_tokens;
  for (const auto& [doc, tokens] : pool.documents) {
    if (remaining == 0) break;
    if (tokens.empty()) continue;
    const int take = std::min<int>(remaining, static_cast<int>(tokens.size()));
    EvidenceItem item;
    item.tokens.assign(tokens.begin(), tokens.begin() + take);
    item.doc_index = doc;
    item.words = take;
    ev.items.push_back(std::move(item));
    ev.total_words += take;
    remaining -= take;
  }
  for (auto& item : ev.items) item.weight = 1.0 / static_cast<double>(ev.items.size());
  return ev;
}

}  // namespace biogen::retriever
