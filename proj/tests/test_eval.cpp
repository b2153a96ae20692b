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

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "biogen/ablation.hpp"
#include "biogen/corpus/synth.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::eval;

namespace {

const std::vector<corpus::Biography>& fixture() {
  static const auto c = corpus::synth_generate(51, 3);
  return c;
}

pipeline::PipelineConfig short_sections() {
  pipeline::PipelineConfig c;
  c.max_sections = 3;
  c.constraints.beam_size = 1;
  c.constraints.max_len = 6;
  return c;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("metric selection parsing") {
    const auto all = MetricSelection::parse("all");
    CHECK((all.rouge && all.equivalence && all.coverage && all.concentration));
    const auto r = MetricSelection::parse("rouge");
    CHECK(r.rouge);
    CHECK_FALSE((r.equivalence || r.coverage || r.concentration));
    const auto two = MetricSelection::parse("entity_coverage,concentration");
    CHECK_FALSE(two.rouge);
    CHECK((two.coverage && two.concentration));
    CHECK_THROWS_AS(MetricSelection::parse("bleu"), std::invalid_argument);
    CHECK_THROWS_AS(MetricSelection::parse(""), std::invalid_argument);
  }

  TEST_CASE("scoring a draft against the gold article") {
    corpus::Biography gold;
    gold.id = "g1";
    gold.sections = {{"toplevel", "Ann Lee is a poet."}, {"career", "She wrote Blue Rivers."}};
    pipeline::ArticleDraft d;
    d.sections.push_back({"toplevel", "Ann Lee is a poet.", {}, {}, {}, false});
    const auto s = score_article(gold, d);
    CHECK(s.id == "g1");
    REQUIRE(s.section_rouge.size() == 2);
    CHECK(s.section_rouge[0] == std::pair<std::string, double>{"toplevel", 1.0});
    CHECK(s.section_rouge[1].second == 0.0);
    CHECK(s.rouge_l == doctest::Approx(metrics::rouge_l(d.text(), gold.text()).f1));
    // Rated per generated sentence, so the missing section does not count.
    CHECK(s.equivalence == 1.0);
    // No section retrieved anything.
    CHECK_FALSE(s.concentration.has_value());
  }

  TEST_CASE("article means skip missing concentration") {
    std::vector<ArticleScores> a(2);
    a[0].rouge_l = 0.2;
    a[1].rouge_l = 0.4;
    a[0].concentration = 0.5;
    const auto m = article_means(a);
    CHECK(m.rouge_l == doctest::Approx(0.3));
    CHECK(m.concentration == 0.5);
    a[0].concentration.reset();
    CHECK(std::isnan(article_means(a).concentration));
  }

  TEST_CASE("evaluation covers every biography") {
    const Model m = testing::tiny_model(1, fixture());
    std::vector<pipeline::ArticleDraft> drafts;
    const auto r = evaluate(m, fixture(), short_sections(), {}, &drafts);
    REQUIRE(r.articles.size() == fixture().size());
    REQUIRE(drafts.size() == fixture().size());
    CHECK(r.query_mode == "full");
    CHECK(r.granularity == "section_by_section");
    for (std::size_t i = 0; i < drafts.size(); ++i) {
      CHECK(r.articles[i].id == fixture()[i].id);
      CHECK(r.articles[i].rouge_l == doctest::Approx(score_article(fixture()[i], drafts[i]).rouge_l));
    }
  }

  TEST_CASE("whole-article models write a single section") {
    auto cfg = testing::tiny_config();
    cfg.granularity = Granularity::kWholeArticle;
    const Model m = testing::tiny_model(2, fixture(), cfg);
    std::vector<pipeline::ArticleDraft> drafts;
    const auto r = evaluate(m, fixture(), short_sections(), {}, &drafts);
    CHECK(r.granularity == "whole_article");
    for (const auto& d : drafts) CHECK(d.sections.size() == 1);
  }

  TEST_CASE("report renders hold only the selected metrics") {
    const Model m = testing::tiny_model(3, fixture());
    const auto r = evaluate(m, fixture(), short_sections(), MetricSelection::parse("rouge"));
    const auto j = to_json(r);
    CHECK(j["mean"].size() == 1);
    CHECK(j["mean"].contains("rouge_l"));
    for (const auto& a : j["articles"]) {
      CHECK(a.contains("rouge_l"));
      CHECK(a.contains("section_rouge_l"));
      CHECK_FALSE(a.contains("equivalence"));
      CHECK_FALSE(a.contains("entity_coverage"));
      CHECK_FALSE(a.contains("concentration"));
    }
    const auto csv = to_csv(r);
    CHECK(csv.rfind("article,rouge_l\n", 0) == 0);
    CHECK(count_lines(csv) == fixture().size() + 2);
    const auto text = render_text(r);
    CHECK(text.find("equivalence") == std::string::npos);
    CHECK(text.find("mean") != std::string::npos);
  }

  TEST_CASE("ablation table has a row per seed and a mean per cell") {
    std::vector<Model> models;
    std::vector<Variant> variants;
    const std::vector<model::QueryMode> modes{model::QueryMode::kFull, model::QueryMode::kNameOnly};
    const std::vector<Granularity> grans{Granularity::kSectionBySection};
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    models.reserve(6);
    for (auto mode : modes) {
      for (auto seed : seeds) {
        auto cfg = testing::tiny_config();
        cfg.query_mode = mode;
        models.push_back(testing::tiny_model(seed, fixture(), cfg));
        variants.push_back({mode, Granularity::kSectionBySection, seed, &models.back()});
      }
    }
    const auto sel = MetricSelection::parse("rouge");
    const auto t = ablation_report(fixture(), variants, modes, grans, seeds, short_sections(), sel);
    REQUIRE(t.rows.size() == 8);
    for (std::size_t cell = 0; cell < 2; ++cell) {
      double sum = 0;
      for (std::size_t k = 0; k < 3; ++k) {
        const auto& row = t.rows[cell * 4 + k];
        CHECK(row.seed == seeds[k]);
        CHECK(row.mode == model::query_mode_name(modes[cell]));
        sum += row.means.rouge_l;
      }
      CHECK_FALSE(t.rows[cell * 4 + 3].seed.has_value());
      CHECK(t.rows[cell * 4 + 3].means.rouge_l == doctest::Approx(sum / 3.0));
    }

    double diff = 0;
    for (std::size_t k = 0; k < 3; ++k) diff += t.rows[k].means.rouge_l - t.rows[4 + k].means.rouge_l;
    CHECK(paired_rouge_difference(t, model::QueryMode::kFull, Granularity::kSectionBySection,
                                  model::QueryMode::kNameOnly, Granularity::kSectionBySection) ==
          doctest::Approx(diff / 3.0));
    CHECK_THROWS_AS(paired_rouge_difference(t, model::QueryMode::kFull, Granularity::kWholeArticle,
                                            model::QueryMode::kNameOnly, Granularity::kSectionBySection),
                    std::invalid_argument);

    const auto csv = to_csv(t);
    std::istringstream in(csv);
    std::string header, line, last;
    std::getline(in, header);
    CHECK(header == "query_mode,granularity,seed,rouge_l");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      last = line;
    }
    CHECK(rows == 8);
    CHECK(last.rfind("name_only,section_by_section,mean,", 0) == 0);
    const auto j = to_json(t);
    CHECK(j["rows"].size() == 8);
    CHECK(j["rows"][3]["seed"] == "mean");
    CHECK(j["rows"][0]["seed"] == 1);
    CHECK(count_lines(render_text(t)) == 9);

    const std::vector<std::uint64_t> more{1, 2, 3, 4};
    CHECK_THROWS_AS(ablation_report(fixture(), variants, modes, grans, more, short_sections(), sel), MissingVariant);
    CHECK_THROWS_AS(ablation_report(fixture(), variants, modes, grans, {}, short_sections(), sel),
                    std::invalid_argument);
  }
}
