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

#include <string>
#include <vector>

#include "biogen/checkpoint.hpp"
#include "biogen/model.hpp"
#include "support.hpp"

using namespace biogen;
using namespace biogen::model;

namespace {

const std::vector<corpus::Biography>& fixture() {
  static const auto c = corpus::synth_generate(21, 2);
  return c;
}

TokenSeq with_bos(const TokenSeq& body) {
  TokenSeq t{text::kBos};
  t.insert(t.end(), body.begin(), body.end());
  return t;
}

Source random_source(Rng& rng, Index vocab, Index n) {
  Source s;
  s.tokens = testing::random_tokens(rng, vocab, n);
  s.sentence_of.assign(s.tokens.size(), -1);
  return s;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("sentence embeddings are deterministic, fixed width and order sensitive") {
    Model m = testing::tiny_model(1, fixture());
    Rng rng(1);
    const auto t = testing::random_tokens(rng, static_cast<Index>(m.vocab.size()), 7);
    const Matrix a = m.encoder.encode_one(t).value();
    CHECK(a == m.encoder.encode_one(t).value());
    CHECK(a.rows() == 1);
    CHECK(a.cols() == m.config.encoder.model_dim);
    CHECK(m.encoder.encode_one(TokenSeq{t[0]}).cols() == m.config.encoder.model_dim);
    TokenSeq rev(t.rbegin(), t.rend());
    CHECK((a - m.encoder.encode_one(rev).value()).norm() > 0.0);
  }

  TEST_CASE("batched encoding equals one-at-a-time encoding") {
    Model m = testing::tiny_model(2, fixture());
    Rng rng(2);
    const auto v = static_cast<Index>(m.vocab.size());
    const std::vector<TokenSeq> batch{testing::random_tokens(rng, v, 3), testing::random_tokens(rng, v, 9),
                                      testing::random_tokens(rng, v, 1)};
    const Matrix all = m.encoder.encode(batch).value();
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Matrix one = m.encoder.encode_one(batch[i]).value();
      CHECK((all.row(static_cast<Index>(i)) - one).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("query token layout follows the mode") {
    const std::vector<std::string> texts{"Jane Wang physicist career chemist toplevel"};
    const auto v = text::Vocabulary::build(texts, 100);
    Query q{"Jane Wang", {"physicist"}, "career", QueryMode::kFull};
    CHECK(v.decode(query_tokens(v, q)) == "jane wang <sep> physicist <sep> career");
    q.occupations = {"physicist", "chemist"};
    CHECK(v.decode(query_tokens(v, q)) == "jane wang <sep> physicist chemist <sep> career");
    q.mode = QueryMode::kNameOccupation;
    CHECK(v.decode(query_tokens(v, q)) == "jane wang <sep> physicist chemist");
    q.mode = QueryMode::kNameOnly;
    CHECK(v.decode(query_tokens(v, q)) == "jane wang");
  }

  TEST_CASE("headings change the query embedding") {
    Model m = testing::tiny_model(3, fixture());
    const auto& b = fixture()[0];
    const auto top = m.encoder.encode_one(query_tokens(m.vocab, {b.name, b.occupations, "toplevel"}));
    const auto career = m.encoder.encode_one(query_tokens(m.vocab, {b.name, b.occupations, "career"}));
    CHECK((top.value() - career.value()).norm() > 0.0);
  }

  TEST_CASE("sources cut evidence from the tail") {
    const TokenSeq q{10, 11};
    const std::vector<TokenSeq> ev{{20, 21, 22}, {30, 31, 32}};
    const auto s = build_source(q, ev, 6);
    CHECK(s.tokens == TokenSeq{10, 11, text::kSep, 20, 21, 22});
    CHECK(s.sentence_of == std::vector<Index>{-1, -1, -1, 0, 0, 0});
    CHECK(build_source(q, {}, 6).tokens == q);
    CHECK_THROWS(build_source(q, ev, 1));
  }

  TEST_CASE("targets and decoder inputs") {
    const TokenSeq body{10, 11, 12};
    const auto t = make_target(body, TokenSeq{40}, 100);
    CHECK(t == TokenSeq{10, 11, 12, text::kNextHeading, 40, text::kEos});
    CHECK(make_target(body, std::nullopt, 100) ==
          TokenSeq{10, 11, 12, text::kNextHeading, text::kEndArticle, text::kEos});
    CHECK(make_target(body, TokenSeq{40}, 5) == TokenSeq{10, 11, text::kNextHeading, 40, text::kEos});
    CHECK(decoder_input(t) == TokenSeq{text::kBos, 10, 11, 12, text::kNextHeading, 40});
  }

  TEST_CASE("generated sequences parse along the grammar") {
    const auto p = parse_output({10, 11, text::kNextHeading, 40, 41, text::kEos});
    CHECK(p.body == TokenSeq{10, 11});
    CHECK(p.heading == TokenSeq{40, 41});
    CHECK(p.terminated);
    CHECK_FALSE(p.end_article);
    const auto e = parse_output({10, text::kNextHeading, text::kEndArticle, text::kEos});
    CHECK(e.end_article);
    CHECK(e.heading.empty());
    CHECK_FALSE(parse_output({10, 11}).terminated);
  }

  TEST_CASE("logits cover the vocabulary at every target position") {
    Model m = testing::tiny_model(4, fixture());
    Rng rng(4);
    const auto v = static_cast<Index>(m.vocab.size());
    const auto out = m.generator.forward(random_source(rng, v, 12), {}, with_bos(testing::random_tokens(rng, v, 8)), {});
    CHECK(out.logits.rows() == 9);
    CHECK(out.logits.cols() == v);
    CHECK(out.layer_inputs.size() == static_cast<std::size_t>(m.config.generator.dec_layers));
  }

  TEST_CASE("incremental steps match the full pass") {
    Model m = testing::tiny_model(5, fixture());
    Rng rng(5);
    const auto v = static_cast<Index>(m.vocab.size());
    const auto src = random_source(rng, v, 15);
    const auto cache = m.generator.make_cache(
        m.generator.forward(src, {}, with_bos(testing::random_tokens(rng, v, 6)), {}).layer_inputs);
    const auto input = with_bos(testing::random_tokens(rng, v, 10));
    const Matrix full = m.generator.forward(src, {}, input, cache).logits.value();
    Generator::Session session(m.generator, src, {}, cache);
    auto state = session.initial_state();
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Eigen::RowVectorXd step = session.step(state, input[i]);
      CHECK((step - full.row(static_cast<Index>(i))).cwiseAbs().maxCoeff() < 1e-9);
    }
  }

  TEST_CASE("empty cache and disabled cache agree") {
    auto off = testing::tiny_config();
    off.generator.cache_size = 0;
    Model on_m = testing::tiny_model(6, fixture());
    Model off_m = testing::tiny_model(6, fixture(), off);
    Rng rng(6);
    const auto v = static_cast<Index>(on_m.vocab.size());
    const auto src = random_source(rng, v, 10);
    const auto input = with_bos(testing::random_tokens(rng, v, 5));
    const auto prev = off_m.generator.forward(src, {}, input, {});
    CHECK(off_m.generator.make_cache(prev.layer_inputs).empty());
    CHECK(off_m.generator.forward(src, {}, input, {}).logits.value() ==
          on_m.generator.forward(src, {}, input, {}).logits.value());
  }

  TEST_CASE("cache windows") {
    auto cfg = testing::tiny_config();
    cfg.generator.max_target = 128;
    cfg.generator.cache_size = 64;
    Model m = testing::tiny_model(7, fixture(), cfg);
    Rng rng(7);
    const auto v = static_cast<Index>(m.vocab.size());
    const auto src = random_source(rng, v, 10);

    const auto short_in = with_bos(testing::random_tokens(rng, v, 20));
    const auto short_out = m.generator.forward(src, {}, short_in, {});
    CHECK(m.generator.make_cache(short_out.layer_inputs).size() == 21);

    const auto long_in = with_bos(testing::random_tokens(rng, v, 99));
    const auto long_out = m.generator.forward(src, {}, long_in, {});
    const auto cache = m.generator.make_cache(long_out.layer_inputs);
    REQUIRE(cache.size() == 64);
    // The kept rows equal a fresh recomputation of the same section.
    const auto again = m.generator.forward(src, {}, long_in, {});
    for (std::size_t l = 0; l < cache.layers.size(); ++l) {
      const Matrix tail = again.layer_inputs[l].value().bottomRows(64);
      CHECK((cache.layers[l].value() - tail).cwiseAbs().maxCoeff() < 1e-9);
      CHECK_FALSE(cache.layers[l].requires_grad());
    }
  }

  TEST_CASE("different memory changes the logits") {
    Model m = testing::tiny_model(8, fixture());
    Rng rng(8);
    const auto v = static_cast<Index>(m.vocab.size());
    const auto src = random_source(rng, v, 10);
    const auto input = with_bos(testing::random_tokens(rng, v, 6));
    const auto a = m.generator.make_cache(m.generator.forward(src, {}, with_bos(testing::random_tokens(rng, v, 6)), {}).layer_inputs);
    const auto b = m.generator.make_cache(m.generator.forward(src, {}, with_bos(testing::random_tokens(rng, v, 6)), {}).layer_inputs);
    const Matrix la = m.generator.forward(src, {}, input, a).logits.value();
    const Matrix lb = m.generator.forward(src, {}, input, b).logits.value();
    CHECK((la - lb).norm() > 0.0);
  }

  TEST_CASE("beam 1 matches the greedy oracle") {
    Model m = testing::tiny_model(9, fixture());
    for (int trial = 0; trial < 5; ++trial) {
      Rng rng(90 + static_cast<std::uint64_t>(trial));
      const auto v = static_cast<Index>(m.vocab.size());
      const auto src = random_source(rng, v, 12);
      DecodeConstraints c;
      c.beam_size = 1;
      c.max_len = 12;
      CHECK(m.generator.generate(src, {}, {}, c).tokens == testing::greedy_oracle(m.generator, src, {}, {}, c));
    }
  }

  TEST_CASE("minimum length holds for every beam") {
    Model m = testing::tiny_model(10, fixture());
    Rng rng(10);
    const auto src = random_source(rng, static_cast<Index>(m.vocab.size()), 12);
    for (int beam : {1, 3, 5}) {
      DecodeConstraints c;
      c.beam_size = beam;
      c.min_len = 10;
      c.max_len = 14;
      const auto out = m.generator.generate(src, {}, {}, c);
      CHECK(out.terminated);
      CHECK(out.body.size() + out.heading.size() + (out.end_article ? 1 : 0) >= 10);
      CHECK_FALSE(out.body.empty());
      CHECK((out.end_article || !out.heading.empty()));
    }
  }

  TEST_CASE("masking follows the grammar") {
    const Index v = 12;
    DecodeConstraints c;
    GrammarState s;
    Eigen::RowVectorXd l = Eigen::RowVectorXd::Zero(v);
    mask_logits(l, s, c);
    for (TokenId t : {text::kPad, text::kBos, text::kSep, text::kEos, text::kEndArticle, text::kNextHeading}) {
      CHECK(std::isinf(l(t)));
    }
    CHECK(l(text::kUnk) == 0.0);
    s.advance(9);
    l.setZero();
    mask_logits(l, s, c);
    CHECK(l(text::kNextHeading) == 0.0);
    s.advance(text::kNextHeading);
    l.setZero();
    mask_logits(l, s, c);
    CHECK(std::isinf(l(text::kEos)));  // a heading needs a token first
    CHECK(l(text::kEndArticle) == 0.0);
    s.advance(text::kEndArticle);
    l.setZero();
    mask_logits(l, s, c);
    for (Index t = 0; t < v; ++t) CHECK((t == text::kEos) != std::isinf(l(t)));
  }

  TEST_CASE("invalid decode constraints") {
    DecodeConstraints c;
    c.beam_size = 0;
    CHECK_THROWS(c.validate());
    c = {};
    c.min_len = 5;
    c.max_len = 3;
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("model config JSON round trip") {
    auto c = testing::tiny_config();
    c.query_mode = QueryMode::kNameOccupation;
    c.granularity = Granularity::kWholeArticle;
    c.retrieval.strategy = retriever::Strategy::kTwoStage;
    c.tied_encoders = false;
    CHECK(model_config_from_json(to_json(c)) == c);
  }

  TEST_CASE("untied encoders get their own parameters") {
    auto c = testing::tiny_config();
    c.tied_encoders = false;
    Model m = testing::tiny_model(11, fixture(), c);
    CHECK(m.query_encoder.has_value());
    Model tied = testing::tiny_model(11, fixture());
    CHECK(m.parameter_count() > tied.parameter_count());
  }

  TEST_CASE("clones are independent") {
    Model m = testing::tiny_model(12, fixture());
    Model c = m.clone();
    c.parameters()[0].tensor.mutable_value()(0, 0) += 1.0;
    CHECK(m.parameters()[0].tensor.value()(0, 0) != c.parameters()[0].tensor.value()(0, 0));
  }

  TEST_CASE("checkpoints round trip and reject damage") {
    Model m = testing::tiny_model(13, fixture());
    const std::string bytes = checkpoint::serialize(m);
    auto back = checkpoint::deserialize(bytes);
    CHECK(back.model.config == m.config);
    CHECK(back.model.vocab == m.vocab);
    CHECK(checkpoint::serialize(back.model) == bytes);
    CHECK(back.train_config.is_null());

    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(checkpoint::deserialize(bad), checkpoint::CheckpointError);
    CHECK_THROWS_AS(checkpoint::deserialize(bytes.substr(0, bytes.size() / 2)), checkpoint::CheckpointError);
    CHECK_THROWS_AS(checkpoint::load("/nonexistent/model.ckpt"), checkpoint::CheckpointError);
  }

  TEST_CASE("embedding tables must match the vocabulary") {
    Model m = testing::tiny_model(14, fixture());
    CHECK_NOTHROW(m.check_vocab());
    m.vocab = text::Vocabulary();
    CHECK_THROWS_AS(m.check_vocab(), ModelMismatch);
  }
}
