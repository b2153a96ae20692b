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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "biogen/model.hpp"
#include "biogen/retriever.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::retriever;
using numerics::Tensor;

namespace {

EvidencePool pool_of(const std::vector<std::pair<int, int>>& doc_words) {
  EvidencePool p;
  std::vector<int> next(16, 0);
  for (const auto& [doc, words] : doc_words) {
    p.sentences.push_back({doc, next[static_cast<std::size_t>(doc)]++, words, TokenSeq(static_cast<std::size_t>(words), text::kUnk)});
  }
  return p;
}

Tensor row(std::vector<double> v) { return Tensor::vector(v); }

std::vector<std::pair<int, int>> provenance(const RetrievedEvidence& e) {
  std::vector<std::pair<int, int>> out;
  for (const auto& i : e.items) out.emplace_back(i.doc_index, i.sentence_index);
  return out;
}

}  // namespace

TEST_SUITE("retriever") {
  TEST_CASE("dot-product scores") {
    Matrix q(1, 3), s(2, 3);
    q << 1, 0, 0;
    s << 0, 1, 0, 0, 0, 1;
    CHECK(score(Tensor(q), Tensor(s)).value().isZero(0.0));
    Matrix u(1, 3);
    u << 0.6, 0.8, 0.0;
    CHECK(score(Tensor(u), Tensor(u)).item() == doctest::Approx(1.0));
  }

  TEST_CASE("score ranking matches an argsort of explicit dot products") {
    Rng rng(1);
    Matrix q(1, 6), s(5, 6);
    for (Index i = 0; i < q.size(); ++i) q.data()[i] = rng.normal();
    for (Index i = 0; i < s.size(); ++i) s.data()[i] = rng.normal();
    std::vector<double> dots(5);
    for (int i = 0; i < 5; ++i) {
      for (int c = 0; c < 6; ++c) dots[static_cast<std::size_t>(i)] += q(0, c) * s(i, c);
    }
    std::vector<int> want(5), got(5);
    std::iota(want.begin(), want.end(), 0);
    std::iota(got.begin(), got.end(), 0);
    const Matrix sc = score(Tensor(q), Tensor(s)).value();
    std::sort(want.begin(), want.end(), [&](int a, int b) { return dots[static_cast<std::size_t>(a)] > dots[static_cast<std::size_t>(b)]; });
    std::sort(got.begin(), got.end(), [&](int a, int b) { return sc(0, a) > sc(0, b); });
    CHECK(got == want);
  }

  TEST_CASE("ample budget returns every sentence") {
    const auto p = pool_of({{0, 5}, {0, 6}, {1, 7}, {2, 3}});
    RetrievalConfig cfg;
    const auto e = select(row({0.1, 0.4, -2.0, 0.3}), p, cfg);
    CHECK(e.items.size() == 4);
    CHECK(e.total_words == 21);
    double w = 0;
    for (const auto& i : e.items) w += i.weight;
    CHECK(w == doctest::Approx(1.0));
  }

  TEST_CASE("top two of three engineered scores") {
    const auto p = pool_of({{0, 5}, {1, 5}, {2, 5}});
    RetrievalConfig cfg;
    cfg.top_k = 2;
    const auto e = select(row({0.9, 0.1, 0.5}), p, cfg);
    CHECK(provenance(e) == std::vector<std::pair<int, int>>{{0, 0}, {2, 0}});
  }

  TEST_CASE("word budget admits one of three long sentences") {
    const auto p = pool_of({{0, 600}, {1, 600}, {2, 600}});
    const auto e = select(row({0.2, 0.3, 0.1}), p, RetrievalConfig{});
    REQUIRE(e.items.size() == 1);
    CHECK(e.items[0].doc_index == 1);
    RetrievalConfig tight;
    tight.max_words = 100;
    CHECK_THROWS_AS(select(row({0.2, 0.3, 0.1}), p, tight), EmptyEvidence);
  }

  TEST_CASE("the budget walk skips oversized sentences and continues") {
    const std::vector<ScoredCandidate> c{{3.0, 0, 0, 60}, {2.0, 0, 1, 50}, {1.0, 1, 0, 30}, {1.0, 0, 2, 10}};
    // 60 fits, 50 would overflow 100, then 30 fits; the tie at 1.0 goes to doc 0.
    CHECK(select_indices(c, 5, 100) == std::vector<std::size_t>{0, 3, 2});
    CHECK(select_indices(c, 2, 100) == std::vector<std::size_t>{0, 3});
  }

  TEST_CASE("best document and its ties") {
    const std::vector<ScoredCandidate> c{{0.5, 2, 0, 1}, {0.9, 1, 0, 1}, {0.9, 3, 0, 1}};
    CHECK(best_document(c) == 1);
  }

  TEST_CASE("two-stage keeps only the best document") {
    const auto p = pool_of({{0, 5}, {0, 5}, {1, 5}, {1, 5}});
    RetrievalConfig two;
    two.strategy = Strategy::kTwoStage;
    const auto e = select(row({0.9, 0.1, 0.8, 0.7}), p, two);
    CHECK(provenance(e) == std::vector<std::pair<int, int>>{{0, 0}, {0, 1}});
  }

  TEST_CASE("two-stage equals flat when the winners share a document") {
    RetrievalConfig flat, two;
    flat.top_k = two.top_k = 2;
    two.strategy = Strategy::kTwoStage;
    const auto p = pool_of({{0, 5}, {0, 5}, {1, 5}});
    const auto s = row({0.9, 0.8, 0.1});
    CHECK(provenance(select(s, p, two)) == provenance(select(s, p, flat)));
    const auto single = pool_of({{4, 5}, {4, 9}, {4, 2}});
    const auto s1 = row({0.1, 0.7, 0.3});
    flat.top_k = two.top_k = 40;
    CHECK(provenance(select(s1, single, two)) == provenance(select(s1, single, flat)));
  }

  TEST_CASE("empty pools raise EmptyEvidence") {
    CHECK_THROWS_AS(select(row({0.5}), EvidencePool{}, RetrievalConfig{}), EmptyEvidence);
  }

  TEST_CASE("soft weights carry gradient back to the scores") {
    const auto p = pool_of({{0, 5}, {1, 5}, {2, 5}});
    std::vector<double> v{0.3, 0.2, 0.1};
    Tensor s = Tensor::vector(v, true);
    RetrievalConfig cfg;
    cfg.top_k = 2;
    const auto e = select(s, p, cfg);
    Matrix pick(2, 1);
    pick << 1.0, 0.0;
    numerics::backward(numerics::sum(numerics::matmul(e.soft_weights, Tensor(pick))));
    // d w0 / d s0 = w0 (1 - w0), d w0 / d s1 = -w0 w1, and s2 was not selected.
    const double w0 = e.items[0].weight, w1 = e.items[1].weight;
    CHECK(s.grad()(0, 0) == doctest::Approx(w0 * (1 - w0)));
    CHECK(s.grad()(0, 1) == doctest::Approx(-w0 * w1));
    CHECK(s.grad()(0, 2) == 0.0);
  }

  TEST_CASE("baseline takes a prefix of the first long document") {
    EvidencePool p;
    p.documents = {{0, TokenSeq(1200, 10)}, {1, TokenSeq(50, 11)}};
    const auto e = baseline_truncate(p, 1000);
    REQUIRE(e.items.size() == 1);
    CHECK(e.items[0].doc_index == 0);
    CHECK(e.items[0].tokens.size() == 1000);
  }

  TEST_CASE("baseline walks documents in hit order") {
    EvidencePool p;
    p.documents = {{0, TokenSeq(400, 10)}, {1, TokenSeq(400, 11)}, {2, TokenSeq(400, 12)}};
    const auto e = baseline_truncate(p, 1000);
    REQUIRE(e.items.size() == 3);
    CHECK(e.items[0].tokens.size() == 400);
    CHECK(e.items[1].tokens.size() == 400);
    CHECK(e.items[2].tokens.size() == 200);
    CHECK(e.items[2].doc_index == 2);
    CHECK_FALSE(e.soft_weights.defined());
  }

  TEST_CASE("baseline tolerates an empty pool") {
    CHECK(baseline_truncate(EvidencePool{}, 1000).empty());
  }

  TEST_CASE("pools split hits into sentences with provenance") {
    const std::vector<std::string> texts{"Ann was born in Rome. She moved to Oslo.", "Ann sings."};
    const auto v = text::Vocabulary::build(texts, 100);
    const std::vector<corpus::EvidenceDocument> hits{{0, "https://a.org", "a", texts[0]}, {1, "https://b.org", "b", texts[1]}};
    const auto p = build_pool(v, hits, 4);
    REQUIRE(p.sentences.size() == 3);
    CHECK(p.sentences[1].doc_index == 0);
    CHECK(p.sentences[1].sentence_index == 1);
    CHECK(p.sentences[2].doc_index == 1);
    CHECK(p.sentences[0].words == 5);
    CHECK(p.sentences[0].tokens.size() == 4);  // capped
    CHECK(p.documents.size() == 2);
  }

  TEST_CASE("desk budget keeps the full-scale words per sentence") {
    const auto d = RetrievalConfig::desk();
    const RetrievalConfig f;
    CHECK(static_cast<double>(d.max_words) / d.top_k == doctest::Approx(static_cast<double>(f.max_words) / f.top_k));
  }
}
