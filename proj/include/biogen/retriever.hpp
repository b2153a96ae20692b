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
#include <stdexcept>
#include <string>
#include <vector>

#include "biogen/corpus/corpus.hpp"
#include "biogen/model/encoder.hpp"
#include "biogen/numerics/tensor.hpp"
#include "biogen/text/text.hpp"

namespace biogen::retriever {

using model::TokenSeq;
using numerics::Tensor;

enum class Strategy { kFlat, kTwoStage, kBaselineTruncate };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

struct RetrievalConfig {
  int top_k = 40;
  int max_words = 1000;
  double temperature = 1.0;
  Strategy strategy = Strategy::kFlat;

  // Three sentences at the full-scale ratio of 25 words per sentence. The
  // synthetic sections need two evidence sentences each, so one query can
  // not gather a whole article's facts.
  static RetrievalConfig desk();
  void validate() const;
  friend bool operator==(const RetrievalConfig&, const RetrievalConfig&) = default;
};

class EmptyEvidence : public std::runtime_error {
 public:
  EmptyEvidence() : std::runtime_error("no candidate evidence sentences") {}
};

struct CandidateSentence {
  int doc_index = 0;
  int sentence_index = 0;
  int words = 0;
  TokenSeq tokens;  // capped at the encoder's position limit
};

// Sentence-split, tokenized view of one subject's hits.
struct EvidencePool {
  std::vector<CandidateSentence> sentences;
  std::vector<std::pair<int, TokenSeq>> documents;  // (doc_index, full token sequence), hit order

  std::vector<TokenSeq> sentence_tokens() const;
};

EvidencePool build_pool(const text::Vocabulary& vocab, std::span<const corpus::EvidenceDocument> hits,
                        Index max_sentence_tokens);

struct EvidenceItem {
  TokenSeq tokens;
  int doc_index = 0;
  int sentence_index = 0;
  int words = 0;
  double score = 0.0;
  double weight = 0.0;
};

struct RetrievedEvidence {
  std::vector<EvidenceItem> items;
  int total_words = 0;
  // [1, items] softmax weights on the autograd path; undefined when the
  // weights are constant (baseline) or there are no items.
  Tensor soft_weights;

  bool empty() const { return items.empty(); }
  std::vector<TokenSeq> tokens() const;
};

// Inner products <q, s_i>: query [1, d], sentences [n, d] -> [1, n].
Tensor score(const Tensor& query, const Tensor& sentences);

struct ScoredCandidate {
  double score = 0.0;
  int doc_index = 0;
  int sentence_index = 0;
  int words = 0;
};

// Walks candidates by descending score (ties: doc_index, then sentence_index),
// skipping any sentence that would push the running word total past
// max_words, and stops after top_k selections. Returns candidate positions
// in selection order.
std::vector<std::size_t> select_indices(std::span<const ScoredCandidate> candidates, int top_k, int max_words);

// Document whose best sentence scores highest; ties go to the lower index.
int best_document(std::span<const ScoredCandidate> candidates);

// Flat or two-stage selection over a pool with precomputed scores.
// Throws EmptyEvidence when the pool has no sentences.
RetrievedEvidence select(const Tensor& scores, const EvidencePool& pool, const RetrievalConfig& config);

// The first `max_tokens` tokens of the documents in hit order, one item per
// (possibly cut) document, uniform weights and zero scores.
RetrievedEvidence baseline_truncate(const EvidencePool& pool, int max_tokens);

}  // namespace biogen::retriever
