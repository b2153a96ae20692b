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

#include "biogen/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "biogen/log.hpp"
#include "biogen/numerics/ops.hpp"

namespace biogen::trainer {

namespace ops = numerics;
using numerics::Tensor;

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.lr = 1e-3;
  c.warmup_updates = 50;
  c.max_updates = 2000;
  c.dropout = 0.0;
  c.attention_dropout = 0.0;
  c.encoder_lr_scale = 0.1;
  return c;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (end_lr < 0.0 || end_lr > lr) throw std::invalid_argument("end_lr must lie in [0, lr]");
  if (!(power > 0.0)) throw std::invalid_argument("schedule power must be positive");
  if (max_updates < 0 || warmup_updates < 0) throw std::invalid_argument("update counts must be non-negative");
  if (warmup_updates > max_updates) throw std::invalid_argument("warmup_updates exceeds max_updates");
  auto rate = [](double v, const char* name) {
    if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1)");
  };
  rate(dropout, "dropout");
  rate(attention_dropout, "attention_dropout");
  rate(label_smoothing, "label_smoothing");
  rate(weight_decay, "weight_decay");
  rate(beta1, "beta1");
  rate(beta2, "beta2");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (!(encoder_lr_scale >= 0.0)) throw std::invalid_argument("encoder_lr_scale must be non-negative");
}

numerics::PolynomialDecaySchedule TrainConfig::schedule() const {
  return {lr, end_lr, power, warmup_updates, max_updates};
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["lr"] = c.lr;
  j["end_lr"] = c.end_lr;
  j["power"] = c.power;
  j["warmup_updates"] = c.warmup_updates;
  j["max_updates"] = c.max_updates;
  j["dropout"] = c.dropout;
  j["attention_dropout"] = c.attention_dropout;
  j["label_smoothing"] = c.label_smoothing;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["frozen_retrieval"] = c.frozen_retrieval;
  j["encoder_lr_scale"] = c.encoder_lr_scale;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
  for (const auto& [key, v] : j.items()) {
    if (key == "lr") c.lr = v.get<double>();
    else if (key == "end_lr") c.end_lr = v.get<double>();
    else if (key == "power") c.power = v.get<double>();
    else if (key == "warmup_updates") c.warmup_updates = v.get<int>();
    else if (key == "max_updates") c.max_updates = v.get<int>();
    else if (key == "dropout") c.dropout = v.get<double>();
    else if (key == "attention_dropout") c.attention_dropout = v.get<double>();
    else if (key == "label_smoothing") c.label_smoothing = v.get<double>();
    else if (key == "weight_decay") c.weight_decay = v.get<double>();
    else if (key == "beta1") c.beta1 = v.get<double>();
    else if (key == "beta2") c.beta2 = v.get<double>();
    else if (key == "adam_eps") c.adam_eps = v.get<double>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "frozen_retrieval") c.frozen_retrieval = v.get<bool>();
    else if (key == "encoder_lr_scale") c.encoder_lr_scale = v.get<double>();
    else throw std::invalid_argument("unknown training option: " + key);
  }
  return c;
}

std::vector<Example> make_examples(const corpus::Biography& bio, const text::Vocabulary& vocab,
                                   Granularity granularity, Index max_target, model::QueryMode mode) {
  std::vector<Example> out;
  if (granularity == Granularity::kWholeArticle) {
    Example e;
    e.query = {bio.name, bio.occupations, std::string(corpus::kTopLevel), mode};
    e.target = model::make_target(vocab.encode(bio.text()), std::nullopt, max_target);
    out.push_back(std::move(e));
    return out;
  }
  for (std::size_t i = 0; i < bio.sections.size(); ++i) {
    Example e;
    e.query = {bio.name, bio.occupations, bio.sections[i].heading, mode};
    std::optional<model::TokenSeq> next;
    if (i + 1 < bio.sections.size()) next = vocab.encode(bio.sections[i + 1].heading);
    e.target = model::make_target(vocab.encode(bio.sections[i].text), next, max_target);
    out.push_back(std::move(e));
  }
  return out;
}

text::Vocabulary build_vocabulary(std::span<const corpus::Biography> corpus, std::size_t max_size) {
  std::vector<std::string> texts;
  for (const auto& bio : corpus) {
    texts.push_back(bio.name);
    for (const auto& o : bio.occupations) texts.push_back(o);
    for (const auto& s : bio.sections) {
      texts.push_back(s.heading);
      texts.push_back(s.text);
    }
    for (const auto& h : corpus::filter_hits(bio.web_hits)) texts.push_back(h.text);
  }
  return text::Vocabulary::build(texts, max_size);
}

Trainer::Trainer(Model& model, const TrainConfig& config, std::span<const corpus::Biography> corpus)
    : model_(model), config_(config), schedule_(config.schedule()), rng_(config.seed) {
  config_.validate();
  model_.check_vocab();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  for (const auto& bio : corpus) {
    Item item;
    item.id = bio.id;
    const auto hits = corpus::filter_hits(bio.web_hits);
    item.pool = retriever::build_pool(model_.vocab, hits, model_.config.encoder.max_positions);
    item.examples = make_examples(bio, model_.vocab, model_.config.granularity, model_.config.generator.max_target,
                                  model_.config.query_mode);
    data_.push_back(std::move(item));
  }
  for (auto& p : model_.parameters()) {
    params_.push_back(p.tensor);
    param_names_.push_back(p.name);
    generator_param_.push_back(p.name.rfind("generator.", 0) == 0);
  }
  order_.resize(data_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  cursor_ = order_.size();
}

Tensor Trainer::biography_loss(std::size_t index, const model::ForwardContext& ctx) {
  const Item& item = data_.at(index);
  const bool embeds = model_.config.retrieval.strategy != retriever::Strategy::kBaselineTruncate;
  const bool frozen = config_.frozen_retrieval;
  Tensor sentences;
  if (embeds && !item.pool.sentences.empty()) {
    if (frozen) {
      numerics::NoGradGuard guard;
      sentences = encode_pool(model_, item.pool);
    } else {
      sentences = encode_pool(model_, item.pool, ctx);
    }
  }
  model::SectionCache cache;
  Tensor total;
  for (const auto& ex : item.examples) {
    retriever::RetrievedEvidence evidence;
    try {
      if (frozen) {
        numerics::NoGradGuard guard;
        evidence = retrieve(model_, item.pool, ex.query, sentences);
      } else {
        evidence = retrieve(model_, item.pool, ex.query, sentences, ctx);
      }
    } catch (const retriever::EmptyEvidence&) {
    }
    const auto source = make_source(model_, ex.query, evidence);
    const auto result =
        model_.generator.forward(source, evidence.soft_weights, model::decoder_input(ex.target), cache, ctx);
    const Tensor loss = ops::label_smoothed_nll(result.logits, ex.target, config_.label_smoothing);
    total = total.defined() ? total + loss : loss;
    cache = model_.generator.make_cache(result.layer_inputs);
  }
  return ops::scale(total, 1.0 / static_cast<double>(item.examples.size()));
}

std::size_t Trainer::next_index() {
  if (cursor_ >= order_.size()) {
    for (std::size_t k = order_.size(); k > 1; --k) std::swap(order_[k - 1], order_[rng_.index(k)]);
    cursor_ = 0;
  }
  return order_[cursor_++];
}

LossRecord Trainer::step() {
  const std::int64_t update = updates_ + 1;
  const double lr = schedule_.at(update);
  model::ForwardContext ctx{true, config_.dropout, config_.attention_dropout, &rng_};
  for (auto& p : params_) p.zero_grad();

  double loss_sum = 0.0;
  std::string ids;
  for (int b = 0; b < config_.batch_size; ++b) {
    const std::size_t index = next_index();
    Tensor loss = biography_loss(index, ctx);
    if (config_.batch_size > 1) loss = ops::scale(loss, 1.0 / config_.batch_size);
    const double value = loss.item();
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "non-finite loss at update " << update << " (lr " << lr << ", biography '" << data_[index].id << "')";
      throw TrainingDiverged(msg.str());
    }
    loss_sum += value;
    numerics::backward(loss);
  }

  if (state_.first_moment.empty()) {
    for (const auto& p : params_) {
      state_.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
      state_.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }
  if (lr > 0.0) {
    const numerics::AdamOptions opt{lr, config_.beta1, config_.beta2, config_.adam_eps, config_.weight_decay};
    numerics::AdamOptions encoder_opt = opt;
    encoder_opt.lr = lr * config_.encoder_lr_scale;
    const bool encoders_fixed = config_.frozen_retrieval || config_.encoder_lr_scale == 0.0 ||
                                model_.config.retrieval.strategy == retriever::Strategy::kBaselineTruncate;
    ++state_.step;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (encoders_fixed && !generator_param_[i]) continue;
      const Matrix g = params_[i].grad();
      if (!g.allFinite()) throw TrainingDiverged("non-finite gradient for " + param_names_[i]);
      numerics::adam_step(params_[i].mutable_value(), g, state_.first_moment[i], state_.second_moment[i],
                          state_.step, generator_param_[i] ? opt : encoder_opt);
    }
  }
  for (auto& p : params_) p.zero_grad();
  updates_ = update;
  return {update, lr, loss_sum};
}

std::vector<LossRecord> Trainer::run(int updates, const std::function<void(const LossRecord&)>& on_update) {
  std::vector<LossRecord> out;
  out.reserve(static_cast<std::size_t>(std::max(updates, 0)));
  for (int u = 0; u < updates; ++u) {
    out.push_back(step());
    if (on_update) on_update(out.back());
  }
  return out;
}

TrainResult train(std::span<const corpus::Biography> corpus, const ModelConfig& model_config,
                  const TrainConfig& config, std::size_t vocab_size,
                  const std::function<void(const LossRecord&)>& on_update) {
  config.validate();
  TrainResult r{Model::create(model_config, build_vocabulary(corpus, vocab_size), config.seed), {}, {}};
  Trainer t(r.model, config, corpus);
  r.losses = t.run(config.max_updates, on_update);
  r.optimizer = t.optimizer();
  return r;
}

TrainResult finetune(const Model& base, std::span<const corpus::Biography> corpus, const TrainConfig& config,
                     const text::Vocabulary* expected_vocab,
                     const std::function<void(const LossRecord&)>& on_update) {
  base.check_vocab();
  if (expected_vocab && !(*expected_vocab == base.vocab)) {
    throw ModelMismatch("finetune vocabulary does not match the checkpoint vocabulary");
  }
  TrainResult r{base.clone(), {}, {}};
  Trainer t(r.model, config, corpus);
  r.losses = t.run(config.max_updates, on_update);
  r.optimizer = t.optimizer();
  return r;
}

void write_loss_csv(const std::filesystem::path& path, std::span<const LossRecord> losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open loss log: " + path.string());
  out << "update,lr,loss\n" << std::setprecision(17);
  for (const auto& r : losses) out << r.update << ',' << r.lr << ',' << r.loss << '\n';
  if (!out) throw std::runtime_error("failed writing loss log: " + path.string());
}

}  // namespace biogen::trainer
