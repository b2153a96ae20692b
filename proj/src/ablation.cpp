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

#include "biogen/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "biogen/text/text.hpp"

namespace biogen::eval {
namespace {

using nlohmann::ordered_json;

std::string fixed(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

ordered_json number_or_null(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

std::vector<std::string> metric_columns(const MetricSelection& m) {
  std::vector<std::string> cols;
  if (m.rouge) cols.push_back("rouge_l");
  if (m.equivalence) cols.push_back("equivalence");
  if (m.coverage) cols.push_back("entity_coverage");
  if (m.concentration) cols.push_back("concentration");
  return cols;
}

std::vector<double> metric_values(const MetricSelection& m, const Means& v) {
  std::vector<double> out;
  if (m.rouge) out.push_back(v.rouge_l);
  if (m.equivalence) out.push_back(v.equivalence);
  if (m.coverage) out.push_back(v.coverage);
  if (m.concentration) out.push_back(v.concentration);
  return out;
}

void put_means(ordered_json& j, const MetricSelection& m, const Means& v) {
  const auto cols = metric_columns(m);
  const auto vals = metric_values(m, v);
  for (std::size_t i = 0; i < cols.size(); ++i) j[cols[i]] = number_or_null(vals[i]);
}

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) line += "  ";
      // Names left-aligned, numbers right-aligned.
      const bool numeric = !r[c].empty() && (std::isdigit(static_cast<unsigned char>(r[c][0])) || r[c] == "-");
      const std::string pad(width[c] - r[c].size(), ' ');
      line += numeric ? pad + r[c] : r[c] + pad;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  return line + '\n';
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

MetricSelection MetricSelection::parse(const std::string& list) {
  MetricSelection m{false, false, false, false};
  std::stringstream in(list);
  std::string item;
  bool any = false;
  while (std::getline(in, item, ',')) {
    if (item == "all") m = {};
    else if (item == "rouge" || item == "rouge_l") m.rouge = true;
    else if (item == "equivalence") m.equivalence = true;
    else if (item == "coverage" || item == "entity_coverage") m.coverage = true;
    else if (item == "concentration") m.concentration = true;
    else throw std::invalid_argument("unknown metric: " + item);
    any = true;
  }
  if (!any) throw std::invalid_argument("no metrics selected");
  return m;
}

Means article_means(std::span<const ArticleScores> articles) {
  Means m;
  if (articles.empty()) return m;
  double conc = 0.0;
  std::size_t conc_n = 0;
  for (const auto& a : articles) {
    m.rouge_l += a.rouge_l;
    m.equivalence += a.equivalence;
    m.coverage += a.coverage;
    if (a.concentration) {
      conc += *a.concentration;
      ++conc_n;
    }
  }
  const double n = static_cast<double>(articles.size());
  m.rouge_l /= n;
  m.equivalence /= n;
  m.coverage /= n;
  m.concentration = conc_n ? conc / static_cast<double>(conc_n) : std::numeric_limits<double>::quiet_NaN();
  return m;
}

ArticleScores score_article(const corpus::Biography& gold, const pipeline::ArticleDraft& draft) {
  ArticleScores s;
  s.id = gold.id;
  const std::string generated = draft.text();
  const std::string reference = gold.text();
  s.rouge_l = metrics::rouge_l(generated, reference).f1;
  for (const auto& section : gold.sections) {
    std::string body;
    for (const auto& g : draft.sections) {
      if (g.heading == section.heading) {
        body = g.body;
        break;
      }
    }
    s.section_rouge.emplace_back(section.heading, metrics::rouge_l(body, section.text).f1);
  }
  s.equivalence = metrics::equivalence_rate(generated, reference);
  const auto cov = metrics::entity_coverage(generated, reference);
  s.coverage = cov.value;
  s.coverage_vacuous = cov.vacuous;
  std::vector<retriever::RetrievedEvidence> evidence;
  for (const auto& g : draft.sections) evidence.push_back(g.evidence);
  try {
    s.concentration = metrics::retrieval_concentration(evidence).mean_max_fraction;
  } catch (const std::invalid_argument&) {
  }
  return s;
}

EvalReport evaluate(const Model& model, std::span<const corpus::Biography> corpus,
                    const pipeline::PipelineConfig& config, const MetricSelection& metrics,
                    std::vector<pipeline::ArticleDraft>* drafts) {
  EvalReport r;
  r.query_mode = model::query_mode_name(model.config.query_mode);
  r.granularity = granularity_name(model.config.granularity);
  r.strategy = retriever::strategy_name(model.config.retrieval.strategy);
  r.metrics = metrics;
  pipeline::PipelineConfig pc = config;
  if (model.config.granularity == Granularity::kWholeArticle) pc.max_sections = 1;
  for (const auto& bio : corpus) {
    const auto hits = corpus::filter_hits(bio.web_hits);
    auto draft = pipeline::write_article(bio.name, bio.occupations, hits, model, pc);
    r.articles.push_back(score_article(bio, draft));
    if (drafts) drafts->push_back(std::move(draft));
  }
  r.mean = article_means(r.articles);
  return r;
}

ordered_json to_json(const EvalReport& report) {
  ordered_json j;
  j["query_mode"] = report.query_mode;
  j["granularity"] = report.granularity;
  j["strategy"] = report.strategy;
  ordered_json mean = ordered_json::object();
  put_means(mean, report.metrics, report.mean);
  j["mean"] = mean;
  ordered_json arts = ordered_json::array();
  for (const auto& a : report.articles) {
    ordered_json row;
    row["id"] = a.id;
    if (report.metrics.rouge) {
      row["rouge_l"] = a.rouge_l;
      ordered_json sections = ordered_json::array();
      for (const auto& [heading, v] : a.section_rouge) sections.push_back({{"heading", heading}, {"rouge_l", v}});
      row["section_rouge_l"] = sections;
    }
    if (report.metrics.equivalence) row["equivalence"] = a.equivalence;
    if (report.metrics.coverage) {
      row["entity_coverage"] = a.coverage;
      row["coverage_vacuous"] = a.coverage_vacuous;
    }
    if (report.metrics.concentration) row["concentration"] = a.concentration ? ordered_json(*a.concentration) : nullptr;
    arts.push_back(row);
  }
  j["articles"] = arts;
  return j;
}

std::string render_text(const EvalReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"article"};
  for (const auto& c : metric_columns(report.metrics)) header.push_back(c);
  rows.push_back(header);
  for (const auto& a : report.articles) {
    Means m{a.rouge_l, a.equivalence, a.coverage,
            a.concentration ? *a.concentration : std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::string> row{a.id};
    for (double v : metric_values(report.metrics, m)) row.push_back(fixed(v));
    rows.push_back(row);
  }
  std::vector<std::string> mean{"mean"};
  for (double v : metric_values(report.metrics, report.mean)) mean.push_back(fixed(v));
  rows.push_back(mean);
  return "query_mode=" + report.query_mode + " granularity=" + report.granularity + " strategy=" + report.strategy +
         "\n" + aligned(rows);
}

std::string to_csv(const EvalReport& report) {
  std::vector<std::string> header{"article"};
  for (const auto& c : metric_columns(report.metrics)) header.push_back(c);
  std::string out = csv_line(header);
  for (const auto& a : report.articles) {
    Means m{a.rouge_l, a.equivalence, a.coverage,
            a.concentration ? *a.concentration : std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::string> row{a.id};
    for (double v : metric_values(report.metrics, m)) row.push_back(csv_number(v));
    out += csv_line(row);
  }
  std::vector<std::string> mean{"mean"};
  for (double v : metric_values(report.metrics, report.mean)) mean.push_back(csv_number(v));
  return out + csv_line(mean);
}

AblationTable ablation_report(std::span<const corpus::Biography> corpus, std::span<const Variant> variants,
                              std::span<const model::QueryMode> modes, std::span<const Granularity> granularities,
                              std::span<const std::uint64_t> seeds, const pipeline::PipelineConfig& config,
                              const MetricSelection& metrics) {
  if (seeds.empty()) throw std::invalid_argument("ablation needs at least one seed");
  auto find = [&](model::QueryMode mode, Granularity g, std::uint64_t seed) -> const Model* {
    for (const auto& v : variants) {
      if (v.mode == mode && v.granularity == g && v.seed == seed && v.model) return v.model;
    }
    return nullptr;
  };
  // Fail before any generation if a cell is missing.
  for (auto g : granularities) {
    for (auto mode : modes) {
      for (auto seed : seeds) {
        if (!find(mode, g, seed)) {
          throw MissingVariant(std::string("no model for variant mode=") + model::query_mode_name(mode) +
                               " granularity=" + granularity_name(g) + " seed=" + std::to_string(seed));
        }
      }
    }
  }
  AblationTable t;
  t.metrics = metrics;
  for (auto g : granularities) {
    for (auto mode : modes) {
      Means sum;
      std::size_t conc_n = 0;
      for (auto seed : seeds) {
        const auto report = evaluate(*find(mode, g, seed), corpus, config, metrics);
        t.rows.push_back({model::query_mode_name(mode), granularity_name(g), seed, report.mean});
        sum.rouge_l += report.mean.rouge_l;
        sum.equivalence += report.mean.equivalence;
        sum.coverage += report.mean.coverage;
        if (!std::isnan(report.mean.concentration)) {
          sum.concentration += report.mean.concentration;
          ++conc_n;
        }
      }
      const double n = static_cast<double>(seeds.size());
      Means mean{sum.rouge_l / n, sum.equivalence / n, sum.coverage / n,
                 conc_n ? sum.concentration / static_cast<double>(conc_n) : std::numeric_limits<double>::quiet_NaN()};
      t.rows.push_back({model::query_mode_name(mode), granularity_name(g), std::nullopt, mean});
    }
  }
  return t;
}

double paired_rouge_difference(const AblationTable& table, model::QueryMode mode_a, Granularity gran_a,
                               model::QueryMode mode_b, Granularity gran_b) {
  const std::string ma = model::query_mode_name(mode_a), mb = model::query_mode_name(mode_b);
  const std::string ga = granularity_name(gran_a), gb = granularity_name(gran_b);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& a : table.rows) {
    if (!a.seed || a.mode != ma || a.granularity != ga) continue;
    for (const auto& b : table.rows) {
      if (b.seed == a.seed && b.mode == mb && b.granularity == gb) {
        sum += a.means.rouge_l - b.means.rouge_l;
        ++pairs;
        break;
      }
    }
  }
  if (pairs == 0) throw std::invalid_argument("no paired rows for the requested variants");
  return sum / static_cast<double>(pairs);
}

ordered_json to_json(const AblationTable& table) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : table.rows) {
    ordered_json j;
    j["query_mode"] = r.mode;
    j["granularity"] = r.granularity;
    j["seed"] = r.seed ? ordered_json(*r.seed) : ordered_json("mean");
    put_means(j, table.metrics, r.means);
    rows.push_back(j);
  }
  return {{"rows", rows}};
}

std::string render_text(const AblationTable& table) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"query_mode", "granularity", "seed"};
  for (const auto& c : metric_columns(table.metrics)) header.push_back(c);
  rows.push_back(header);
  for (const auto& r : table.rows) {
    std::vector<std::string> row{r.mode, r.granularity, r.seed ? std::to_string(*r.seed) : "mean"};
    for (double v : metric_values(table.metrics, r.means)) row.push_back(fixed(v));
    rows.push_back(row);
  }
  return aligned(rows);
}

std::string to_csv(const AblationTable& table) {
  std::vector<std::string> header{"query_mode", "granularity", "seed"};
  for (const auto& c : metric_columns(table.metrics)) header.push_back(c);
  std::string out = csv_line(header);
  for (const auto& r : table.rows) {
    std::vector<std::string> row{r.mode, r.granularity, r.seed ? std::to_string(*r.seed) : "mean"};
    for (double v : metric_values(table.metrics, r.means)) row.push_back(csv_number(v));
    out += csv_line(row);
  }
  return out;
}

}  // namespace biogen::eval
