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

#include <set>
#include <string>
#include <vector>

#include "biogen/corpus/synth.hpp"
#include "biogen/metrics.hpp"
#include "biogen/model.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::metrics;

namespace {

retriever::RetrievedEvidence from_docs(const std::vector<int>& docs) {
  retriever::RetrievedEvidence e;
  for (int d : docs) e.items.push_back({{}, d, 0, 1, 0.0, 0.0});
  return e;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("ROUGE-L basics") {
    const auto same = rouge_l("The cat sat.", "the cat sat");
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f1 == 1.0);
    const auto none = rouge_l("a b", "c d");
    CHECK(none.f1 == 0.0);
    CHECK(rouge_l("", "").f1 == 1.0);
    CHECK(rouge_l("", "x").f1 == 0.0);
  }

  TEST_CASE("ROUGE-L worked example") {
    // LCS "the cat on mat" = 4 of 6 on both sides.
    const auto r = rouge_l("the cat sat on the mat", "the cat lay on a mat");
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("LCS agrees with exhaustive search") {
    Rng rng(11);
    const std::vector<std::string> alphabet{"a", "b", "c"};
    for (int i = 0; i < 200; ++i) {
      std::vector<std::string> x(rng.index(11)), y(rng.index(11));
      for (auto& t : x) t = alphabet[rng.index(3)];
      for (auto& t : y) t = alphabet[rng.index(3)];
      CHECK(lcs_length(x, y) == testing::brute_force_lcs(x, y));
    }
  }

  TEST_CASE("metric tokens drop punctuation") {
    CHECK(metric_tokens("Hello, World!") == std::vector<std::string>{"hello", "world"});
  }

  TEST_CASE("content F1") {
    CHECK(content_f1("She was born in Paris.", "She was born in Paris.") == 1.0);
    CHECK(content_f1("Dogs bark.", "Cats meow.") == 0.0);
    // Content tokens: {she, born, paris, 1901} vs {she, born, paris}.
    const double p = 3.0 / 4.0, r = 1.0;
    CHECK(content_f1("she was born in paris in 1901", "she was born in paris") ==
          doctest::Approx(2 * p * r / (p + r)));
    CHECK(default_scorer("Ann was born in Rome.", "In Rome, Ann was born."));
    CHECK_FALSE(default_scorer("Ann was born in Rome.", "Ann died in Oslo."));
  }

  TEST_CASE("equivalence rate") {
    const std::string text = "Ann was born in Rome. She wrote poems.";
    CHECK(equivalence_rate(text, text) == 1.0);
    CHECK(equivalence_rate("Ann was born in Rome. Bob sells fish.", "Ann was born in Rome in spring. Ann was born in Rome.") ==
          0.5);
    CHECK(equivalence_rate(text, text, [](const std::string&, const std::string&) { return false; }) == 0.0);
    CHECK(equivalence_rate("", text) == 0.0);
  }

  TEST_CASE("equivalence needs both directions") {
    int calls = 0;
    const Scorer one_way = [&](const std::string& a, const std::string&) {
      ++calls;
      return a.rfind("Gen", 0) == 0;
    };
    CHECK(equivalence_rate("Gen one.", "Ref one.", one_way) == 0.0);
    CHECK(calls >= 1);
  }

  TEST_CASE("entity extraction") {
    CHECK(default_extractor("She met Marie Curie in Paris.") == std::set<std::string>{"marie curie", "paris"});
    CHECK(default_extractor("The dog slept.").empty());
    CHECK(default_extractor("New York is big. Then we saw Rome.") == std::set<std::string>{"new york", "rome"});
  }

  TEST_CASE("entity coverage") {
    const std::string ref = "She met Marie Curie in Paris.";
    CHECK(entity_coverage("Later, Marie Curie went to Paris.", ref).value == 1.0);
    const auto half = entity_coverage("She lived in Paris.", ref);
    CHECK(half.value == 0.5);
    CHECK_FALSE(half.vacuous);
    const auto v = entity_coverage("anything", "the dog slept.");
    CHECK(v.value == 1.0);
    CHECK(v.vacuous);
  }

  TEST_CASE("planted entities are recovered from gold text") {
    double found = 0, total = 0;
    for (const auto& r : corpus::synth_generate_detailed(12, 40)) {
      const auto got = default_extractor(r.bio.text());
      for (const auto& e : r.entities) {
        total += 1;
        found += got.count(text::to_lower(e));
      }
    }
    CHECK(found / total >= 0.95);
  }

  TEST_CASE("retrieval concentration") {
    const std::vector<retriever::RetrievedEvidence> one{from_docs({3, 3, 3})};
    CHECK(retrieval_concentration(one).mean_max_fraction == 1.0);
    const std::vector<retriever::RetrievedEvidence> spread{from_docs({0, 1, 2, 3, 0, 1, 2, 3})};
    const auto c = retrieval_concentration(spread);
    CHECK(c.mean_max_fraction == 0.25);
    CHECK(c.sections[0].histogram.at(2) == 2);
    const std::vector<retriever::RetrievedEvidence> mixed{from_docs({1, 1}), {}, from_docs({0, 1})};
    CHECK(retrieval_concentration(mixed).mean_max_fraction == doctest::Approx(0.75));
    const std::vector<retriever::RetrievedEvidence> empty{{}, {}};
    CHECK_THROWS_AS(retrieval_concentration(empty), std::invalid_argument);
  }

  TEST_CASE("retrieval on the synthetic corpus concentrates on few documents") {
    const auto bios = corpus::synth_generate(13, 10);
    Model m = testing::tiny_model(13, bios);
    std::vector<retriever::RetrievedEvidence> ev;
    double uniform = 0;
    for (const auto& b : bios) {
      const auto hits = corpus::filter_hits(b.web_hits);
      const auto pool = retriever::build_pool(m.vocab, hits, m.config.encoder.max_positions);
      for (const auto& s : b.sections) {
        ev.push_back(retrieve(m, pool, {b.name, b.occupations, s.heading}));
        uniform += 1.0 / static_cast<double>(hits.size());
      }
    }
    uniform /= static_cast<double>(ev.size());
    CHECK(retrieval_concentration(ev).mean_max_fraction > uniform);
  }
}
