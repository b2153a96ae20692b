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

// Command-line front end: synth, train, finetune, generate, evaluate, ablate, stats.
#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biogen/ablation.hpp"
#include "biogen/checkpoint.hpp"
#include "biogen/corpus/corpus.hpp"
#include "biogen/corpus/synth.hpp"
#include "biogen/log.hpp"
#include "biogen/pipeline.hpp"
#include "biogen/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using namespace biogen;

namespace {

// Bad flags, unreadable inputs or malformed configs; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  ordered_json config = ordered_json::object();
  std::uint64_t seed = 0;

  void input(const std::string& role, const fs::path& p) { inputs_[role] = p.string(); }
  void output(const fs::path& p) { outputs_.push_back(p); }

  void write(const fs::path& path) const {
    ordered_json j;
    j["command"] = command_;
    j["config"] = config;
    j["seed"] = seed;
    j["inputs"] = inputs_;
    ordered_json outs = ordered_json::object();
    for (const auto& p : outputs_) outs[p.string()] = {{"fnv1a64", fnv1a_file(p)}};
    j["outputs"] = outs;
    j["duration_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  ordered_json inputs_ = ordered_json::object();
  std::vector<fs::path> outputs_;
};

fs::path manifest_path(const std::string& flag, const fs::path& out) {
  return flag.empty() ? fs::path(out.string() + ".manifest.json") : fs::path(flag);
}

std::vector<corpus::Biography> read_corpus(const std::string& path, bool allow_empty = false) {
  if (path.empty()) throw UsageError("--corpus is required");
  if (!fs::exists(path)) throw UsageError("corpus not found: " + path);
  auto c = corpus::load_corpus(path);
  if (c.empty() && !allow_empty) throw UsageError("corpus is empty: " + path);
  return c;
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("config not found: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config must be a flat JSON object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_object() || v.is_array()) throw UsageError("config key '" + k + "' must be a scalar");
  }
  return j;
}

const std::vector<std::string> kModelKeys = {"query_mode",      "granularity", "strategy",     "top_k_sentences",
                                             "max_words",       "temperature", "baseline_tokens", "tied_encoders",
                                             "vocab_size"};

bool is_model_key(const std::string& k) {
  return std::find(kModelKeys.begin(), kModelKeys.end(), k) != kModelKeys.end();
}

struct RunConfig {
  ModelConfig model;
  trainer::TrainConfig train = trainer::TrainConfig::desk();
  std::size_t vocab_size = 8000;
};

void apply_model_key(RunConfig& rc, const std::string& key, const json& v) {
  if (key == "query_mode") rc.model.query_mode = model::parse_query_mode(v.get<std::string>());
  else if (key == "granularity") rc.model.granularity = parse_granularity(v.get<std::string>());
  else if (key == "strategy") rc.model.retrieval.strategy = retriever::parse_strategy(v.get<std::string>());
  else if (key == "top_k_sentences") rc.model.retrieval.top_k = v.get<int>();
  else if (key == "max_words") rc.model.retrieval.max_words = v.get<int>();
  else if (key == "temperature") rc.model.retrieval.temperature = v.get<double>();
  else if (key == "baseline_tokens") rc.model.baseline_tokens = v.get<int>();
  else if (key == "tied_encoders") rc.model.tied_encoders = v.get<bool>();
  else if (key == "vocab_size") rc.vocab_size = v.get<std::size_t>();
}

// Splits a flat config into model and training keys; unknown keys are errors.
RunConfig resolve_config(const json& file) {
  RunConfig rc;
  json train_keys = json::object();
  try {
    for (const auto& [k, v] : file.items()) {
      if (is_model_key(k)) apply_model_key(rc, k, v);
      else train_keys[k] = v;
    }
    rc.train = trainer::train_config_from_json(train_keys, rc.train);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config value has the wrong type: ") + e.what());
  }
  return rc;
}

ordered_json run_config_json(const RunConfig& rc) {
  ordered_json j = trainer::to_json(rc.train);
  j["query_mode"] = model::query_mode_name(rc.model.query_mode);
  j["granularity"] = granularity_name(rc.model.granularity);
  j["strategy"] = retriever::strategy_name(rc.model.retrieval.strategy);
  j["top_k_sentences"] = rc.model.retrieval.top_k;
  j["max_words"] = rc.model.retrieval.max_words;
  j["temperature"] = rc.model.retrieval.temperature;
  j["baseline_tokens"] = rc.model.baseline_tokens;
  j["tied_encoders"] = rc.model.tied_encoders;
  j["vocab_size"] = rc.vocab_size;
  return j;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_loss_log(const fs::path& path, const std::vector<trainer::LossRecord>& losses) {
  trainer::write_loss_csv(path, losses);
}

std::function<void(const trainer::LossRecord&)> progress(int total) {
  return [total](const trainer::LossRecord& r) {
    const int every = std::max(1, total / 20);
    if (r.update % every == 0 || r.update == total) {
      std::ostringstream s;
      s << "update " << r.update << "/" << total << " lr " << r.lr << " loss " << r.loss;
      log::info(s.str());
    }
  };
}

// Shared option block for decoding.
struct DecodeFlags {
  int beam = 5;
  int max_sections = 10;
  std::optional<int> min_len;
  std::optional<int> max_len;
  double length_penalty = 0.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--beam", beam, "Beam size")->capture_default_str();
    cmd->add_option("--max-sections", max_sections, "Section cap per article")->capture_default_str();
    cmd->add_option("--min-len", min_len, "Minimum section length in tokens");
    cmd->add_option("--max-len", max_len, "Maximum section length in tokens");
    cmd->add_option("--length-penalty", length_penalty, "Beam length penalty exponent")->capture_default_str();
  }

  pipeline::PipelineConfig config() const {
    pipeline::PipelineConfig pc;
    pc.max_sections = max_sections;
    pc.constraints.beam_size = beam;
    pc.constraints.min_len = min_len;
    pc.constraints.max_len = max_len;
    pc.constraints.length_penalty = length_penalty;
    try {
      pc.constraints.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (max_sections < 1) throw UsageError("--max-sections must be at least 1");
    return pc;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["beam"] = beam;
    j["max_sections"] = max_sections;
    j["min_len"] = min_len ? ordered_json(*min_len) : nullptr;
    j["max_len"] = max_len ? ordered_json(*max_len) : nullptr;
    j["length_penalty"] = length_penalty;
    return j;
  }
};

checkpoint::Checkpoint read_checkpoint(const std::string& path) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path);
  return checkpoint::load(path);
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 1;
  int n = 100;
  std::string out;
  std::string distractors = "on";
  bool low_evidence = false;
  std::string manifest;
};

int cmd_synth(const SynthArgs& a) {
  Manifest m("synth");
  corpus::SynthConfig cfg = a.low_evidence ? corpus::SynthConfig::low_evidence_split() : corpus::SynthConfig{};
  if (a.distractors != "on" && a.distractors != "off") throw UsageError("--distractors must be on or off");
  cfg.distractors = a.distractors == "on";
  if (a.n <= 0) throw UsageError("--n must be positive");
  const auto bios = corpus::synth_generate(a.seed, a.n, cfg);
  corpus::write_corpus(fs::path(a.out), bios);
  m.seed = a.seed;
  m.config = {{"n", a.n}, {"distractors", a.distractors}, {"low_evidence", a.low_evidence}};
  m.output(a.out);
  m.write(manifest_path(a.manifest, a.out));
  log::info("wrote " + std::to_string(bios.size()) + " biographies to " + a.out);
  return 0;
}

// --- train / finetune --------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<int> max_updates;
  std::optional<std::string> query_mode;
  std::optional<std::string> granularity;
  std::optional<std::string> strategy;
  std::string out;
  std::string loss_log;
  std::string manifest;
  std::string from;  // finetune only
};

RunConfig resolve_flags(const TrainArgs& a, RunConfig rc) {
  if (a.seed) rc.train.seed = *a.seed;
  if (a.lr) rc.train.lr = *a.lr;
  if (a.max_updates) rc.train.max_updates = *a.max_updates;
  try {
    if (a.query_mode) rc.model.query_mode = model::parse_query_mode(*a.query_mode);
    if (a.granularity) rc.model.granularity = parse_granularity(*a.granularity);
    if (a.strategy) rc.model.retrieval.strategy = retriever::parse_strategy(*a.strategy);
    rc.train.warmup_updates = std::min(rc.train.warmup_updates, rc.train.max_updates);
    rc.train.validate();
    rc.model.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return rc;
}

int cmd_train(const TrainArgs& a) {
  Manifest m("train");
  const auto bios = read_corpus(a.corpus);
  const RunConfig rc = resolve_flags(a, resolve_config(read_config(a.config)));
  auto result = trainer::train(bios, rc.model, rc.train, rc.vocab_size, progress(rc.train.max_updates));
  checkpoint::save(a.out, result.model, trainer::to_json(rc.train), &result.optimizer);
  const fs::path loss = a.loss_log.empty() ? fs::path(a.out + ".loss.csv") : fs::path(a.loss_log);
  write_loss_log(loss, result.losses);
  m.seed = rc.train.seed;
  m.config = run_config_json(rc);
  m.input("corpus", a.corpus);
  if (!a.config.empty()) m.input("config", a.config);
  m.output(a.out);
  m.output(loss);
  m.write(manifest_path(a.manifest, a.out));
  if (!result.losses.empty()) {
    std::ostringstream s;
    s << "trained " << result.losses.size() << " updates, final loss " << result.losses.back().loss;
    log::info(s.str());
  }
  return 0;
}

int cmd_finetune(const TrainArgs& a) {
  Manifest m("finetune");
  const auto bios = read_corpus(a.corpus);
  auto base = read_checkpoint(a.from);
  const json file = read_config(a.config);
  for (const auto& [k, v] : file.items()) {
    if (is_model_key(k)) throw UsageError("finetune cannot change model option '" + k + "'");
  }
  RunConfig rc = resolve_config(file);
  rc.model = base.model.config;
  TrainArgs flags = a;
  flags.query_mode.reset();
  flags.granularity.reset();
  flags.strategy.reset();
  if (a.query_mode || a.granularity || a.strategy) throw UsageError("finetune keeps the checkpoint's model options");
  rc = resolve_flags(flags, rc);
  auto result = trainer::finetune(base.model, bios, rc.train, nullptr, progress(rc.train.max_updates));
  checkpoint::save(a.out, result.model, trainer::to_json(rc.train), &result.optimizer);
  const fs::path loss = a.loss_log.empty() ? fs::path(a.out + ".loss.csv") : fs::path(a.loss_log);
  write_loss_log(loss, result.losses);
  m.seed = rc.train.seed;
  m.config = run_config_json(rc);
  m.input("corpus", a.corpus);
  m.input("from", a.from);
  if (!a.config.empty()) m.input("config", a.config);
  m.output(a.out);
  m.output(loss);
  m.write(manifest_path(a.manifest, a.out));
  return 0;
}

// --- generate ----------------------------------------------------------------

struct GenerateArgs {
  std::string checkpoint;
  std::string corpus;
  std::string name;
  std::vector<std::string> occupations;
  std::string out;
  std::string manifest;
  DecodeFlags decode;
};

int cmd_generate(const GenerateArgs& a) {
  Manifest m("generate");
  const auto pc = a.decode.config();
  if (a.corpus.empty() == a.name.empty()) throw UsageError("give exactly one of --corpus or --name");
  std::vector<corpus::Biography> records;
  if (!a.corpus.empty()) {
    records = read_corpus(a.corpus, true);
  } else {
    corpus::Biography b;
    b.id = "query";
    b.name = a.name;
    b.occupations = a.occupations;
    records.push_back(std::move(b));
  }
  const auto ck = read_checkpoint(a.checkpoint);
  pipeline::PipelineConfig run = pc;
  if (ck.model.config.granularity == Granularity::kWholeArticle) run.max_sections = 1;

  std::string rendered;
  std::string sidecar;
  for (const auto& bio : records) {
    const auto hits = corpus::filter_hits(bio.web_hits);
    const auto draft = pipeline::write_article(bio.name, bio.occupations, hits, ck.model, run);
    rendered += "### " + bio.id + "\n" + pipeline::render_article(draft) + "\n";
    sidecar += pipeline::draft_to_json(draft, bio.id).dump() + "\n";
  }
  const fs::path side = a.out + ".drafts.jsonl";
  write_text(a.out, rendered);
  write_text(side, sidecar);
  m.config = a.decode.to_json();
  m.input("checkpoint", a.checkpoint);
  if (!a.corpus.empty()) m.input("corpus", a.corpus);
  m.output(a.out);
  m.output(side);
  m.write(manifest_path(a.manifest, a.out));
  log::info("generated " + std::to_string(records.size()) + " articles");
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string corpus;
  std::string metrics = "all";
  std::string out;
  std::string csv;
  std::string manifest;
  DecodeFlags decode;
};

eval::MetricSelection parse_metrics(const std::string& s) {
  try {
    return eval::MetricSelection::parse(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_evaluate(const EvaluateArgs& a) {
  Manifest m("evaluate");
  const auto metrics = parse_metrics(a.metrics);
  const auto pc = a.decode.config();
  const auto bios = read_corpus(a.corpus);
  const auto ck = read_checkpoint(a.checkpoint);
  const auto report = eval::evaluate(ck.model, bios, pc, metrics);
  std::cout << eval::render_text(report);
  write_text(a.out, eval::to_json(report).dump(2) + "\n");
  m.output(a.out);
  if (!a.csv.empty()) {
    write_text(a.csv, eval::to_csv(report));
    m.output(a.csv);
  }
  m.config = a.decode.to_json();
  m.config["metrics"] = a.metrics;
  m.input("checkpoint", a.checkpoint);
  m.input("corpus", a.corpus);
  m.write(manifest_path(a.manifest, a.out));
  return 0;
}

// --- ablate ------------------------------------------------------------------

struct AblateArgs {
  std::string corpus;
  std::string eval_corpus;
  std::string config;
  std::string modes = "name_only,name_occupation,full";
  std::string granularities = "section_by_section";
  std::string seeds = "1,2,3,4,5";
  std::string metrics = "all";
  std::string out;
  std::string csv;
  std::string manifest;
  DecodeFlags decode;
};

int cmd_ablate(const AblateArgs& a) {
  Manifest m("ablate");
  const auto metrics = parse_metrics(a.metrics);
  const auto pc = a.decode.config();
  const auto train_bios = read_corpus(a.corpus);
  const auto eval_bios = read_corpus(a.eval_corpus);
  const RunConfig base = resolve_config(read_config(a.config));

  std::vector<model::QueryMode> modes;
  std::vector<Granularity> grans;
  std::vector<std::uint64_t> seeds;
  try {
    for (const auto& s : split_list(a.modes)) modes.push_back(model::parse_query_mode(s));
    for (const auto& s : split_list(a.granularities)) grans.push_back(parse_granularity(s));
    for (const auto& s : split_list(a.seeds)) seeds.push_back(std::stoull(s));
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad ablation list: ") + e.what());
  }
  if (modes.empty() || grans.empty() || seeds.empty()) throw UsageError("empty --modes, --granularities or --seeds");

  std::vector<Model> models;
  models.reserve(modes.size() * grans.size() * seeds.size());
  std::vector<eval::Variant> variants;
  for (auto g : grans) {
    for (auto mode : modes) {
      for (auto seed : seeds) {
        RunConfig rc = base;
        rc.model.query_mode = mode;
        rc.model.granularity = g;
        rc.train.seed = seed;
        log::info(std::string("training ") + model::query_mode_name(mode) + "/" + granularity_name(g) + " seed " +
                  std::to_string(seed));
        models.push_back(trainer::train(train_bios, rc.model, rc.train, rc.vocab_size).model);
        variants.push_back({mode, g, seed, &models.back()});
      }
    }
  }
  const auto table = eval::ablation_report(eval_bios, variants, modes, grans, seeds, pc, metrics);
  std::cout << eval::render_text(table);
  write_text(a.out, eval::to_json(table).dump(2) + "\n");
  m.output(a.out);
  if (!a.csv.empty()) {
    write_text(a.csv, eval::to_csv(table));
    m.output(a.csv);
  }
  m.config = run_config_json(base);
  m.config["modes"] = a.modes;
  m.config["granularities"] = a.granularities;
  m.config["seeds"] = a.seeds;
  m.config["metrics"] = a.metrics;
  m.config["decode"] = a.decode.to_json();
  m.input("corpus", a.corpus);
  m.input("eval_corpus", a.eval_corpus);
  if (!a.config.empty()) m.input("config", a.config);
  m.write(manifest_path(a.manifest, a.out));
  return 0;
}

// --- stats -------------------------------------------------------------------

struct StatsArgs {
  std::string corpus;
  bool json = false;
  std::string out;
  std::string manifest;
};

std::string stats_table(const corpus::DatasetStats& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "biographies        " << s.biographies << '\n';
  out << "avg sections       " << s.avg_sections << '\n';
  out << "avg section length " << s.avg_section_len << '\n';
  out << "avg article length " << s.avg_article_len << '\n';
  out << "avg web hits       " << s.avg_hits << '\n';
  out << "avg unigram overlap " << s.avg_overlap << '\n';
  return out.str();
}

ordered_json stats_json(const corpus::DatasetStats& s) {
  ordered_json j;
  j["biographies"] = s.biographies;
  j["avg_sections"] = s.avg_sections;
  j["avg_section_len"] = s.avg_section_len;
  j["avg_article_len"] = s.avg_article_len;
  j["avg_hits"] = s.avg_hits;
  j["avg_overlap"] = s.avg_overlap;
  return j;
}

int cmd_stats(const StatsArgs& a) {
  Manifest m("stats");
  const auto bios = read_corpus(a.corpus);
  const auto stats = corpus::corpus_stats(bios);
  const std::string text = a.json ? stats_json(stats).dump(2) + "\n" : stats_table(stats);
  std::cout << text;
  m.input("corpus", a.corpus);
  m.config = {{"json", a.json}};
  fs::path manifest = a.manifest;
  if (!a.out.empty()) {
    write_text(a.out, text);
    m.output(a.out);
    if (manifest.empty()) manifest = a.out + ".manifest.json";
  }
  if (manifest.empty()) manifest = "stats.manifest.json";
  m.write(manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented section-by-section biography generator"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus");
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--n", synth.n, "Number of biographies")->capture_default_str();
  s->add_option("--out", synth.out, "Output JSONL path")->required();
  s->add_option("--distractors", synth.distractors, "on or off")->capture_default_str();
  s->add_flag("--low-evidence", synth.low_evidence, "Low-evidence split (toplevel and career only)");
  s->add_option("--manifest", synth.manifest, "Manifest path (default <out>.manifest.json)");

  TrainArgs train;
  auto add_train = [](CLI::App* c, TrainArgs& t) {
    c->add_option("--corpus", t.corpus, "Training corpus (JSONL)");
    c->add_option("--config", t.config, "Flat JSON config");
    c->add_option("--seed", t.seed, "Training seed");
    c->add_option("--lr", t.lr, "Peak learning rate");
    c->add_option("--max-updates", t.max_updates, "Number of updates");
    c->add_option("--out", t.out, "Checkpoint path")->required();
    c->add_option("--loss-log", t.loss_log, "Loss CSV (default <out>.loss.csv)");
    c->add_option("--manifest", t.manifest, "Manifest path (default <out>.manifest.json)");
  };
  auto* t = app.add_subcommand("train", "Train a model");
  add_train(t, train);
  t->add_option("--query-mode", train.query_mode, "name_only, name_occupation or full");
  t->add_option("--granularity", train.granularity, "section_by_section or whole_article");
  t->add_option("--strategy", train.strategy, "flat, two_stage or baseline_truncate");

  TrainArgs finetune;
  auto* f = app.add_subcommand("finetune", "Continue training a checkpoint");
  add_train(f, finetune);
  f->add_option("--from", finetune.from, "Base checkpoint")->required();

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write articles");
  g->add_option("--checkpoint", gen.checkpoint)->required();
  g->add_option("--corpus", gen.corpus, "Records to generate for (JSONL)");
  g->add_option("--name", gen.name, "Subject name (instead of --corpus)");
  g->add_option("--occupation", gen.occupations, "Subject occupation (repeatable)");
  g->add_option("--out", gen.out, "Rendered articles path")->required();
  g->add_option("--manifest", gen.manifest, "Manifest path (default <out>.manifest.json)");
  gen.decode.add(g);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score generated articles against gold sections");
  e->add_option("--checkpoint", ev.checkpoint)->required();
  e->add_option("--corpus", ev.corpus, "Evaluation corpus (JSONL)");
  e->add_option("--metrics", ev.metrics, "Comma list: rouge,equivalence,coverage,concentration")->capture_default_str();
  e->add_option("--out", ev.out, "JSON report path")->required();
  e->add_option("--csv", ev.csv, "Also write a CSV report");
  e->add_option("--manifest", ev.manifest, "Manifest path (default <out>.manifest.json)");
  ev.decode.add(e);

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Train and evaluate query-mode and granularity variants");
  a->add_option("--corpus", ab.corpus, "Training corpus (JSONL)");
  a->add_option("--eval-corpus", ab.eval_corpus, "Evaluation corpus (JSONL)")->required();
  a->add_option("--config", ab.config, "Flat JSON training config");
  a->add_option("--modes", ab.modes)->capture_default_str();
  a->add_option("--granularities", ab.granularities)->capture_default_str();
  a->add_option("--seeds", ab.seeds)->capture_default_str();
  a->add_option("--metrics", ab.metrics)->capture_default_str();
  a->add_option("--out", ab.out, "JSON table path")->required();
  a->add_option("--csv", ab.csv, "Also write a CSV table");
  a->add_option("--manifest", ab.manifest, "Manifest path (default <out>.manifest.json)");
  ab.decode.add(a);

  StatsArgs st;
  auto* sc = app.add_subcommand("stats", "Corpus statistics");
  sc->add_option("--corpus", st.corpus, "Corpus (JSONL)");
  sc->add_flag("--json", st.json, "Print JSON instead of a table");
  sc->add_option("--out", st.out, "Also write the output to this file");
  sc->add_option("--manifest", st.manifest, "Manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }
  log::set_level(quiet ? log::Level::kWarning : log::Level::kInfo);

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*f) return cmd_finetune(finetune);
    if (*g) return cmd_generate(gen);
    if (*e) return cmd_evaluate(ev);
    if (*a) return cmd_ablate(ab);
    if (*sc) return cmd_stats(st);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const corpus::CorpusError& err) {
    std::cerr << "error: corpus " << err.what() << '\n';
    return 2;
  } catch (const checkpoint::CheckpointError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const ModelMismatch& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
