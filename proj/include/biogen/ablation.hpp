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
#include <json.hpp>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "biogen/corpus/corpus.hpp"
#include "biogen/metrics.hpp"
#include "biogen/model.hpp"
#include "biogen/pipeline.hpp"

namespace biogen::eval {

struct MetricSelection {
  bool rouge = true;
  bool equivalence = true;
  bool coverage = true;
  bool concentration = true;

  // Comma-separated subset of rouge, equivalence, coverage, concentration;
  // "all" selects everything.
  static MetricSelection parse(const std::string& list);
};

struct Means {
  double rouge_l = 0.0;
  double equivalence = 0.0;
  double coverage = 0.0;
  // NaN when no article retrieved anything.
  double concentration = 0.0;
};

struct ArticleScores {
  std::string id;
  double rouge_l = 0.0;
  // Gold heading -> ROUGE-L F1 against the generated section with that
  // heading (0 when it was not generated).
  std::vector<std::pair<std::string, double>> section_rouge;
  double equivalence = 0.0;
  double coverage = 0.0;
  bool coverage_vacuous = false;
  std::optional<double> concentration;
};

struct EvalReport {
  std::string query_mode;
  std::string granularity;
  std::string strategy;
  MetricSelection metrics;
  std::vector<ArticleScores> articles;
  Means mean;
};

Means article_means(std::span<const ArticleScores> articles);

ArticleScores score_article(const corpus::Biography& gold, const pipeline::ArticleDraft& draft);

// Generates every biography of `corpus` from its filtered hits and scores it
// against the gold sections. Whole-article models generate a single section.
EvalReport evaluate(const Model& model, std::span<const corpus::Biography> corpus,
                    const pipeline::PipelineConfig& config = {}, const MetricSelection& metrics = {},
                    std::vector<pipeline::ArticleDraft>* drafts = nullptr);

nlohmann::ordered_json to_json(const EvalReport& report);
std::string render_text(const EvalReport& report);
std::string to_csv(const EvalReport& report);

class MissingVariant : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Variant {
  model::QueryMode mode = model::QueryMode::kFull;
  Granularity granularity = Granularity::kSectionBySection;
  std::uint64_t seed = 0;
  const Model* model = nullptr;
};

struct AblationRow {
  std::string mode;
  std::string granularity;
  std::optional<std::uint64_t> seed;  // empty on the per-cell mean row
  Means means;
};

struct AblationTable {
  MetricSelection metrics;
  std::vector<AblationRow> rows;
};

// One row per (mode, granularity, seed) followed by a mean row per cell.
// Throws MissingVariant naming the first requested cell without a model.
AblationTable ablation_report(std::span<const corpus::Biography> corpus, std::span<const Variant> variants,
                              std::span<const model::QueryMode> modes, std::span<const Granularity> granularities,
                              std::span<const std::uint64_t> seeds, const pipeline::PipelineConfig& config = {},
                              const MetricSelection& metrics = {});

// Mean over seeds of ROUGE-L(a) - ROUGE-L(b), pairing per-seed rows.
double paired_rouge_difference(const AblationTable& table, model::QueryMode mode_a, Granularity gran_a,
                               model::QueryMode mode_b, Granularity gran_b);

nlohmann::ordered_json to_json(const AblationTable& table);
std::string render_text(const AblationTable& table);
std::string to_csv(const AblationTable& table);

}  // namespace biogen::eval
