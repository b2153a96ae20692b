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
#include "biogen/pipeline.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::pipeline;

namespace {

const std::vector<corpus::Biography>& fixture() {
  static const auto c = corpus::synth_generate(31, 3);
  return c;
}

// Pushes the output distribution towards `ranked`, most preferred first.
void bias_towards(Model& m, const std::vector<text::TokenId>& ranked) {
  for (auto& p : m.parameters()) {
    if (p.name != "generator.output_bias") continue;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      p.tensor.mutable_value()(0, ranked[i]) = 1000.0 - 10.0 * static_cast<double>(i);
    }
  }
}

PipelineConfig short_sections(int max_sections = 10) {
  PipelineConfig c;
  c.max_sections = max_sections;
  c.constraints.beam_size = 2;
  c.constraints.max_len = 2;  // one body token, one heading token
  return c;
}

ArticleDraft run(const Model& m, const PipelineConfig& c, const PipelineHooks& hooks = {}) {
  const auto& b = fixture()[0];
  return write_article(b.name, b.occupations, corpus::filter_hits(b.web_hits), m, c, hooks);
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("one section when capped at one") {
    Model m = testing::tiny_model(1, fixture());
    const auto d = run(m, short_sections(1));
    REQUIRE(d.sections.size() == 1);
    CHECK(d.sections[0].heading == "toplevel");
    CHECK(d.stop_reason == "max_sections");
  }

  TEST_CASE("a repeated heading stops the article") {
    Model m = testing::tiny_model(2, fixture());
    bias_towards(m, {m.vocab.id("career"), text::kEndArticle});
    const auto d = run(m, short_sections());
    REQUIRE(d.sections.size() == 2);
    CHECK(d.sections[1].heading == "career");
    CHECK(d.stop_reason == "repeated_heading");
  }

  TEST_CASE("END_ARTICLE stops the article") {
    Model m = testing::tiny_model(3, fixture());
    bias_towards(m, {text::kEndArticle, m.vocab.id("career")});
    const auto d = run(m, short_sections());
    CHECK(d.sections.size() == 1);
    CHECK(d.stop_reason == "end_article");
  }

  TEST_CASE("headings chain and the cache is carried between sections") {
    Model m = testing::tiny_model(4, fixture());
    bias_towards(m, {m.vocab.id("career"), text::kEndArticle});
    std::vector<Index> cache_rows;
    std::vector<std::string> headings;
    PipelineHooks hooks;
    hooks.before_section = [&](std::size_t, const model::SectionCache& c, const retriever::RetrievedEvidence&) {
      cache_rows.push_back(c.size());
    };
    hooks.after_section = [&](std::size_t, const DraftSection& s, const model::SectionCache&) {
      headings.push_back(s.heading);
    };
    run(m, short_sections(), hooks);
    // toplevel: BOS + body + NEXT_HEADING + heading = 4 positions (EOS is never fed).
    CHECK(cache_rows == std::vector<Index>{0, 4});
    CHECK(headings == std::vector<std::string>{"toplevel", "career"});
  }

  TEST_CASE("citations and references follow the evidence") {
    Model m = testing::tiny_model(5, fixture());
    for (const auto& b : fixture()) {
      const auto hits = corpus::filter_hits(b.web_hits);
      const auto d = write_article(b.name, b.occupations, hits, m, short_sections(3));
      std::set<int> all;
      for (const auto& s : d.sections) {
        std::set<int> docs;
        for (const auto& item : s.evidence.items) docs.insert(item.doc_index);
        CHECK(s.citations == citer::CitationList(docs.begin(), docs.end()));
        all.insert(docs.begin(), docs.end());
      }
      REQUIRE(d.references.size() == all.size());
      std::size_t k = 0;
      for (int doc : all) {
        CHECK(d.references[k].first == doc);
        CHECK(d.references[k].second == hits[static_cast<std::size_t>(doc)].url);
        ++k;
      }
    }
  }

  TEST_CASE("no hits falls back to the query alone") {
    Model m = testing::tiny_model(6, fixture());
    const auto d = write_article("Nobody Known", {"poet"}, {}, m, short_sections(1));
    REQUIRE(d.sections.size() == 1);
    CHECK(d.sections[0].fallback);
    CHECK(d.sections[0].citations.empty());
    CHECK(d.references.empty());
  }

  TEST_CASE("a one-section article renders without heading lines") {
    ArticleDraft d;
    d.sections.push_back({"toplevel", "Ann is a poet.", {}, {0}, {}, false});
    d.references = {{0, "https://a.org"}};
    const auto r = render_article(d);
    CHECK(r == "Ann is a poet. [1]\n\n1. https://a.org\n");
    CHECK(r.find('=') == std::string::npos);
  }

  TEST_CASE("sections without citations carry no bracket") {
    ArticleDraft d;
    d.sections.push_back({"toplevel", "Ann is a poet.", {}, {0}, {}, false});
    d.sections.push_back({"career", "She writes.", {}, {}, {}, false});
    const auto r = render_article(d);
    CHECK(r.find("=career=\nShe writes.\n") != std::string::npos);
  }

  TEST_CASE("rendered articles parse back exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      ArticleDraft d;
      std::set<int> all;
      const auto n = 1 + rng.index(4);
      for (std::uint64_t i = 0; i < n; ++i) {
        std::set<int> c;
        const auto k = rng.index(4);
        for (std::uint64_t j = 0; j < k; ++j) c.insert(static_cast<int>(rng.index(12)));
        all.insert(c.begin(), c.end());
        d.sections.push_back({i == 0 ? "toplevel" : "heading " + std::to_string(i),
                              trial % 7 == 0 ? "" : "Body " + std::to_string(i) + " text.", {},
                              citer::CitationList(c.begin(), c.end()), {}, false});
      }
      for (int doc : all) d.references.emplace_back(doc, "https://site" + std::to_string(doc) + ".org/p");
      const auto p = parse_rendered(render_article(d));
      REQUIRE(p.sections.size() == d.sections.size());
      for (std::size_t i = 0; i < d.sections.size(); ++i) {
        CHECK(p.sections[i].heading == d.sections[i].heading);
        CHECK(p.sections[i].body == d.sections[i].body);
        CHECK(p.sections[i].citations == d.sections[i].citations);
      }
      CHECK(p.references == d.references);
    }
  }

  TEST_CASE("draft JSON carries sections and references") {
    ArticleDraft d;
    d.name = "Ann";
    d.sections.push_back({"toplevel", "Ann is a poet.", {}, {2}, {}, false});
    d.references = {{2, "https://c.org"}};
    d.stop_reason = "end_article";
    const auto j = draft_to_json(d, "bio-1");
    CHECK(j["id"] == "bio-1");
    CHECK(j["sections"][0]["citations"][0] == 2);
    CHECK(j["references"][0]["url"] == "https://c.org");
    CHECK(j["stop_reason"] == "end_article");
  }

  TEST_CASE("invalid pipeline settings") {
    Model m = testing::tiny_model(8, fixture());
    PipelineConfig c;
    c.max_sections = 0;
    CHECK_THROWS_AS(run(m, c), std::invalid_argument);
  }
}
