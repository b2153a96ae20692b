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

// Fixtures and independent oracles shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "biogen/corpus/synth.hpp"
#include "biogen/model.hpp"
#include "biogen/numerics/ops.hpp"
#include "biogen/retriever.hpp"
#include "biogen/text/text.hpp"
#include "biogen/trainer.hpp"

namespace testing {

using biogen::Index;
using biogen::Matrix;
using biogen::model::TokenSeq;

// Small enough for finite differences and exhaustive checks.
inline biogen::ModelConfig tiny_config() {
  biogen::ModelConfig c;
  c.encoder.layers = 1;
  c.encoder.model_dim = 8;
  c.encoder.heads = 2;
  c.encoder.ff_dim = 16;
  c.encoder.max_positions = 48;
  c.generator.enc_layers = 1;
  c.generator.dec_layers = 2;
  c.generator.model_dim = 8;
  c.generator.heads = 2;
  c.generator.ff_dim = 16;
  c.generator.max_source = 96;
  c.generator.max_target = 48;
  c.generator.cache_size = 16;
  return c;
}

inline biogen::Model tiny_model(std::uint64_t seed, const std::vector<biogen::corpus::Biography>& corpus,
                                biogen::ModelConfig config = tiny_config()) {
  return biogen::Model::create(config, biogen::trainer::build_vocabulary(corpus), seed);
}

// Length of the longest common subsequence by enumerating every subsequence
// of the shorter sequence and testing it against the longer one.
inline std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto& s = a.size() <= b.size() ? a : b;
  const auto& l = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  const std::uint32_t subsets = 1u << s.size();
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    const auto count = static_cast<std::size_t>(__builtin_popcount(mask));
    if (count <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < s.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < l.size() && l[j] != s[i]) ++j;
      if (j == l.size()) ok = false;
      else ++j;
    }
    if (ok) best = count;
  }
  return best;
}

struct OracleCandidate {
  double score;
  int doc;
  int sent;
  int words;
};

// Full sort by (score desc, doc, sentence) followed by a greedy budget walk
// that skips sentences that would overflow the word budget.
inline std::vector<std::size_t> oracle_select(const std::vector<OracleCandidate>& c, int top_k, int max_words) {
  std::vector<std::size_t> order(c.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (c[x].score != c[y].score) return c[x].score > c[y].score;
    if (c[x].doc != c[y].doc) return c[x].doc < c[y].doc;
    return c[x].sent < c[y].sent;
  });
  std::vector<std::size_t> out;
  int words = 0;
  for (auto i : order) {
    if (static_cast<int>(out.size()) == top_k) break;
    if (words + c[i].words > max_words) continue;
    words += c[i].words;
    out.push_back(i);
  }
  return out;
}

// Greedy decoding that recomputes the whole teacher-forced pass at every step
// instead of using the incremental session.
inline TokenSeq greedy_oracle(const biogen::model::Generator& g, const biogen::model::Source& source,
                              const biogen::numerics::Tensor& weights, const biogen::model::SectionCache& cache,
                              const biogen::model::DecodeConstraints& constraints) {
  biogen::numerics::NoGradGuard guard;
  TokenSeq out;
  biogen::model::GrammarState grammar;
  for (Index step = 0; step < g.config().max_target; ++step) {
    TokenSeq input{biogen::text::kBos};
    input.insert(input.end(), out.begin(), out.end());
    const auto result = g.forward(source, weights, input, cache);
    Eigen::RowVectorXd logits = result.logits.value().row(result.logits.rows() - 1);
    biogen::model::mask_logits(logits, grammar, constraints);
    Index best = 0;
    for (Index v = 1; v < logits.size(); ++v) {
      if (logits(v) > logits(best)) best = v;
    }
    const auto token = static_cast<biogen::text::TokenId>(best);
    out.push_back(token);
    grammar.advance(token);
    if (token == biogen::text::kEos) break;
  }
  return out;
}

inline TokenSeq random_tokens(biogen::Rng& rng, Index vocab, Index n) {
  TokenSeq t;
  for (Index i = 0; i < n; ++i) {
    t.push_back(static_cast<biogen::text::TokenId>(biogen::text::kNumReserved + rng.index(vocab - biogen::text::kNumReserved)));
  }
  return t;
}

}  // namespace testing
