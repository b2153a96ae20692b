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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "biogen/corpus/corpus.hpp"
#include "biogen/model.hpp"
#include "biogen/numerics/optim.hpp"
#include "biogen/retriever.hpp"

namespace biogen::trainer {

struct TrainConfig {
  double lr = 3e-5;
  double end_lr = 0.0;
  double power = 1.0;
  int warmup_updates = 500;
  int max_updates = 50000;
  double dropout = 0.1;
  double attention_dropout = 0.1;
  double label_smoothing = 0.1;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Biographies per update.
  int batch_size = 1;
  std::uint64_t seed = 1;
  // Retrieval scores computed without gradient; the sentence encoders are
  // left out of the optimizer.
  bool frozen_retrieval = false;
  // Learning-rate multiplier for the sentence encoder(s). A randomly
  // initialised encoder already ranks by lexical overlap; small steps keep
  // that ranking while the generator learns to use the evidence.
  double encoder_lr_scale = 1.0;

  // Short schedule sized for desk-scale models and synthetic corpora, without
  // dropout (the micro models underfit rather than overfit at this size).
  static TrainConfig desk();
  void validate() const;
  numerics::PolynomialDecaySchedule schedule() const;
};

nlohmann::ordered_json to_json(const TrainConfig& c);
// Applies the keys present in `j` on top of `base`; unknown keys throw.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct Example {
  model::Query query;
  model::TokenSeq target;
};

// One example per section (target = body NEXT_HEADING next heading EOS, with
// END_ARTICLE after the last section), or a single toplevel example over the
// concatenated sections for whole-article granularity.
std::vector<Example> make_examples(const corpus::Biography& bio, const text::Vocabulary& vocab,
                                   Granularity granularity, Index max_target,
                                   model::QueryMode mode = model::QueryMode::kFull);

// Vocabulary over names, occupations, headings, section text and hit text.
text::Vocabulary build_vocabulary(std::span<const corpus::Biography> corpus, std::size_t max_size = 8000);

struct LossRecord {
  std::int64_t update = 0;
  double lr = 0.0;
  double loss = 0.0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Trainer {
 public:
  // Hits are filtered (wikipedia.org removed, capped) on the way in.
  Trainer(Model& model, const TrainConfig& config, std::span<const corpus::Biography> corpus);

  // Mean section loss for one biography of the training set.
  numerics::Tensor biography_loss(std::size_t index, const model::ForwardContext& ctx);

  LossRecord step();
  std::vector<LossRecord> run(int updates, const std::function<void(const LossRecord&)>& on_update = {});

  std::vector<numerics::Tensor>& parameters() { return params_; }
  const numerics::AdamState& optimizer() const { return state_; }
  numerics::AdamState& optimizer() { return state_; }
  std::int64_t updates_done() const { return updates_; }
  std::size_t size() const { return data_.size(); }

 private:
  struct Item {
    std::string id;
    retriever::EvidencePool pool;
    std::vector<Example> examples;
  };

  std::size_t next_index();

  Model& model_;
  TrainConfig config_;
  std::vector<Item> data_;
  std::vector<numerics::Tensor> params_;
  std::vector<std::string> param_names_;
  std::vector<bool> generator_param_;
  numerics::AdamState state_;
  numerics::PolynomialDecaySchedule schedule_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::int64_t updates_ = 0;
};

// Builds the vocabulary from `corpus`, initialises a model and trains it for
// config.max_updates.
struct TrainResult {
  Model model;
  std::vector<LossRecord> losses;
  numerics::AdamState optimizer;
};

TrainResult train(std::span<const corpus::Biography> corpus, const ModelConfig& model_config,
                  const TrainConfig& config, std::size_t vocab_size = 8000,
                  const std::function<void(const LossRecord&)>& on_update = {});

// Continues from a copy of `base` with a fresh optimizer and schedule.
// `expected_vocab`, when given, must equal the checkpoint vocabulary.
TrainResult finetune(const Model& base, std::span<const corpus::Biography> corpus, const TrainConfig& config,
                     const text::Vocabulary* expected_vocab = nullptr,
                     const std::function<void(const LossRecord&)>& on_update = {});

void write_loss_csv(const std::filesystem::path& path, std::span<const LossRecord> losses);

}  // namespace biogen::trainer
