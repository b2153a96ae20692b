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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "biogen/trainer.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::trainer;

namespace {

const std::vector<corpus::Biography>& fixture() {
  static const auto c = corpus::synth_generate(41, 3);
  return c;
}

TrainConfig quick_config(int updates) {
  auto c = TrainConfig::desk();
  c.max_updates = updates;
  c.warmup_updates = std::min(updates, 5);
  c.dropout = 0.1;
  c.attention_dropout = 0.1;
  return c;
}

std::vector<Matrix> snapshot(Model& m, const std::string& prefix) {
  std::vector<Matrix> out;
  for (auto& p : m.parameters()) {
    if (p.name.rfind(prefix, 0) == 0) out.push_back(p.tensor.value());
  }
  return out;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("one example per section with chained headings") {
    const auto& b = fixture()[0];
    const auto v = build_vocabulary(fixture());
    REQUIRE(b.sections.size() == 3);
    const auto ex = make_examples(b, v, Granularity::kSectionBySection, 128);
    REQUIRE(ex.size() == 3);
    for (std::size_t i = 0; i < ex.size(); ++i) {
      CHECK(ex[i].query.heading == b.sections[i].heading);
      CHECK(ex[i].query.name == b.name);
      CHECK(ex[i].target.back() == text::kEos);
      const auto p = model::parse_output(ex[i].target);
      CHECK(p.body == v.encode(b.sections[i].text));
      if (i + 1 < ex.size()) {
        CHECK(p.heading == v.encode(b.sections[i + 1].heading));
      } else {
        CHECK(p.end_article);
      }
    }
  }

  TEST_CASE("whole-article examples concatenate the sections") {
    const auto& b = fixture()[0];
    const auto v = build_vocabulary(fixture());
    const auto ex = make_examples(b, v, Granularity::kWholeArticle, 256);
    REQUIRE(ex.size() == 1);
    CHECK(ex[0].query.heading == "toplevel");
    const auto p = model::parse_output(ex[0].target);
    CHECK(p.end_article);
    CHECK(p.body == v.encode(b.text()));
  }

  TEST_CASE("query modes reach the examples") {
    const auto v = build_vocabulary(fixture());
    const auto ex = make_examples(fixture()[1], v, Granularity::kSectionBySection, 128, model::QueryMode::kNameOnly);
    for (const auto& e : ex) CHECK(e.query.mode == model::QueryMode::kNameOnly);
  }

  TEST_CASE("the vocabulary covers names, headings and hits") {
    const auto v = build_vocabulary(fixture());
    const auto& b = fixture()[2];
    for (const auto& t : text::tokenize(b.name)) CHECK(v.contains(t));
    for (const auto& s : b.sections) CHECK(v.contains(text::tokenize(s.heading)[0]));
    CHECK(v.contains(text::tokenize(b.web_hits[0].text)[0]));
    CHECK(build_vocabulary(fixture(), 20).size() == 20);
  }

  TEST_CASE("schedule endpoints from the config") {
    TrainConfig c;
    c.lr = 1e-3;
    c.warmup_updates = 10;
    c.max_updates = 100;
    const auto s = c.schedule();
    CHECK(s.at(10) == doctest::Approx(1e-3));
    CHECK(s.at(100) <= 1e-9);
  }

  TEST_CASE("config JSON round trip and validation") {
    auto c = TrainConfig::desk();
    c.seed = 77;
    c.frozen_retrieval = true;
    c.encoder_lr_scale = 0.25;
    const auto back = train_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(train_config_from_json(nlohmann::json{{"lr", 0.5}}, c).lr == 0.5);
    CHECK_THROWS(train_config_from_json(nlohmann::json{{"learning_rate", 0.5}}));
    TrainConfig bad;
    bad.warmup_updates = bad.max_updates + 1;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.dropout = 1.0;
    CHECK_THROWS(bad.validate());
  }

  TEST_CASE("same seed gives the same loss curve") {
    const auto cfg = quick_config(6);
    const auto a = train(fixture(), testing::tiny_config(), cfg);
    const auto b = train(fixture(), testing::tiny_config(), cfg);
    REQUIRE(a.losses.size() == 6);
    for (std::size_t i = 0; i < a.losses.size(); ++i) {
      CHECK(a.losses[i].loss == b.losses[i].loss);
      CHECK(a.losses[i].lr == b.losses[i].lr);
    }
    auto other = cfg;
    other.seed = cfg.seed + 1;
    CHECK(train(fixture(), testing::tiny_config(), other).losses.back().loss != a.losses.back().loss);
  }

  TEST_CASE("frozen retrieval leaves the encoder untouched") {
    Model m = testing::tiny_model(3, fixture());
    const auto enc = snapshot(m, "encoder.");
    const auto gen = snapshot(m, "generator.");
    auto cfg = quick_config(3);
    cfg.frozen_retrieval = true;
    Trainer t(m, cfg, fixture());
    t.run(3);
    CHECK(snapshot(m, "encoder.") == enc);
    CHECK(snapshot(m, "generator.") != gen);
  }

  TEST_CASE("the encoder learning rate scale applies") {
    Model a = testing::tiny_model(4, fixture());
    const auto enc = snapshot(a, "encoder.");
    auto cfg = quick_config(3);
    cfg.encoder_lr_scale = 0.0;
    Trainer(a, cfg, fixture()).run(3);
    CHECK(snapshot(a, "encoder.") == enc);

    Model b = testing::tiny_model(4, fixture());
    cfg.encoder_lr_scale = 1.0;
    Trainer(b, cfg, fixture()).run(3);
    CHECK(snapshot(b, "encoder.") != enc);
  }

  TEST_CASE("finetuning with no updates changes nothing") {
    Model base = testing::tiny_model(5, fixture());
    auto cfg = quick_config(0);
    auto r = finetune(base, fixture(), cfg, &base.vocab);
    CHECK(r.losses.empty());
    CHECK(r.optimizer.step == 0);
    CHECK(snapshot(r.model, "") == snapshot(base, ""));
  }

  TEST_CASE("finetuning starts a fresh optimizer") {
    auto cfg = quick_config(3);
    auto first = train(fixture(), testing::tiny_config(), cfg);
    CHECK(first.optimizer.step == 3);
    const auto r = finetune(first.model, fixture(), quick_config(2));
    CHECK(r.optimizer.step == 2);
    CHECK(r.losses.front().update == 1);
    CHECK(r.losses.front().lr == doctest::Approx(quick_config(2).schedule().at(1)));
  }

  TEST_CASE("finetuning refuses a different vocabulary") {
    Model base = testing::tiny_model(6, fixture());
    const text::Vocabulary other;
    CHECK_THROWS_AS(finetune(base, fixture(), quick_config(1), &other), ModelMismatch);
  }

  TEST_CASE("loss log CSV") {
    const std::vector<LossRecord> l{{1, 0.5, 2.25}, {2, 0.25, 1.5}};
    const auto path = std::filesystem::temp_directory_path() / "biogen_loss_test.csv";
    write_loss_csv(path, l);
    std::ifstream in(path);
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    std::filesystem::remove(path);
    CHECK(header == "update,lr,loss");
    CHECK(first == "1,0.5,2.25");
    CHECK(second == "2,0.25,1.5");
  }
}
