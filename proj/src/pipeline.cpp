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

#include "biogen/pipeline.hpp"

#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "biogen/log.hpp"

namespace biogen::pipeline {

std::string ArticleDraft::text() const {
  std::string out;
  for (const auto& s : sections) {
    if (s.body.empty()) continue;
    if (!out.empty()) out += ' ';
    out += s.body;
  }
  return out;
}

ArticleDraft write_article(const std::string& name, const std::vector<std::string>& occupations,
                           std::span<const corpus::EvidenceDocument> hits, const Model& model,
                           const PipelineConfig& config, const PipelineHooks& hooks) {
  model.check_vocab();
  if (config.max_sections < 1) throw std::invalid_argument("max_sections must be at least 1");
  config.constraints.validate();
  numerics::NoGradGuard no_grad;

  ArticleDraft draft;
  draft.name = name;
  draft.occupations = occupations;
  const auto pool = retriever::build_pool(model.vocab, hits, model.config.encoder.max_positions);
  const bool uses_embeddings = model.config.retrieval.strategy != retriever::Strategy::kBaselineTruncate;
  const numerics::Tensor embeddings = uses_embeddings ? encode_pool(model, pool) : numerics::Tensor();

  std::map<int, std::string> urls;
  for (const auto& h : hits) urls.emplace(h.doc_index, h.url);
  std::set<int> cited;
  std::set<std::string> seen{std::string(corpus::kTopLevel)};
  std::string heading(corpus::kTopLevel);
  model::SectionCache cache;
  draft.stop_reason = "max_sections";

  for (int i = 0; i < config.max_sections; ++i) {
    model::Query query{name, occupations, heading, model.config.query_mode};
    DraftSection section;
    section.heading = heading;
    try {
      section.evidence = retrieve(model, pool, query, embeddings);
    } catch (const retriever::EmptyEvidence&) {
      section.fallback = true;
      log::warn("no evidence for '" + name + "' section '" + heading + "'; generating from the query alone");
    }
    const auto source = make_source(model, query, section.evidence);
    if (hooks.before_section) hooks.before_section(static_cast<std::size_t>(i), cache, section.evidence);

    const auto out = model.generator.generate(source, section.evidence.soft_weights, cache, config.constraints);
    section.body_tokens = out.body;
    section.body = model.vocab.render(out.body);
    section.citations = citer::attribute(section.evidence);
    cited.insert(section.citations.begin(), section.citations.end());

    const auto states = model.generator.forward(source, section.evidence.soft_weights,
                                                model::decoder_input(out.tokens), cache);
    cache = model.generator.make_cache(states.layer_inputs);
    if (hooks.after_section) hooks.after_section(static_cast<std::size_t>(i), section, cache);
    draft.sections.push_back(std::move(section));

    if (out.end_article) {
      draft.stop_reason = "end_article";
      break;
    }
    if (!out.terminated || out.heading.empty()) {
      draft.stop_reason = "incomplete_section";
      break;
    }
    heading = model.vocab.decode(out.heading);
    if (!seen.insert(heading).second) {
      draft.stop_reason = "repeated_heading";
      break;
    }
  }
  for (int doc : cited) {
    auto it = urls.find(doc);
    draft.references.emplace_back(doc, it == urls.end() ? std::string() : it->second);
  }
  return draft;
}

namespace {

std::string section_line(const std::string& body, const citer::CitationList& citations) {
  const std::string c = citer::render(citations);
  if (c.empty()) return body;
  return body.empty() ? c : body + " " + c;
}

}  // namespace

std::string render_article(const ArticleDraft& draft) {
  std::ostringstream os;
  for (std::size_t i = 0; i < draft.sections.size(); ++i) {
    const auto& s = draft.sections[i];
    if (i > 0) os << "\n=" << s.heading << "=\n";
    os << section_line(s.body, s.citations) << '\n';
  }
  if (!draft.references.empty()) {
    os << '\n';
    for (const auto& [doc, url] : draft.references) os << doc + 1 << ". " << url << '\n';
  }
  return os.str();
}

ParsedArticle parse_rendered(std::string_view rendered) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(rendered)};
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  static const std::regex kHeading(R"(^=(.+)=$)");
  static const std::regex kBody(R"(^(.*?) ?(\[[0-9]+(?:,[0-9]+)*\])?$)");
  static const std::regex kReference(R"(^([0-9]+)\. (.*)$)");

  ParsedArticle out;
  std::size_t i = 0;
  auto read_body = [&](const std::string& heading) {
    ParsedSection s;
    s.heading = heading;
    if (i < lines.size()) {
      std::smatch m;
      if (std::regex_match(lines[i], m, kBody)) {
        s.body = m[1].str();
        if (m[2].matched) s.citations = citer::parse(m[2].str());
      } else {
        s.body = lines[i];
      }
      ++i;
    }
    out.sections.push_back(std::move(s));
  };
  if (lines.empty()) return out;
  read_body(std::string(corpus::kTopLevel));
  while (i < lines.size()) {
    if (!lines[i].empty()) throw std::invalid_argument("unexpected line in rendered article: " + lines[i]);
    ++i;
    if (i >= lines.size()) break;
    std::smatch m;
    if (std::regex_match(lines[i], m, kHeading)) {
      ++i;
      read_body(m[1].str());
      continue;
    }
    for (; i < lines.size(); ++i) {
      if (!std::regex_match(lines[i], m, kReference)) {
        throw std::invalid_argument("malformed reference line: " + lines[i]);
      }
      out.references.emplace_back(std::stoi(m[1].str()) - 1, m[2].str());
    }
  }
  return out;
}

nlohmann::ordered_json draft_to_json(const ArticleDraft& draft, const std::string& id) {
  nlohmann::ordered_json j;
  if (!id.empty()) j["id"] = id;
  j["name"] = draft.name;
  j["occupations"] = draft.occupations;
  j["sections"] = nlohmann::ordered_json::array();
  for (const auto& s : draft.sections) {
    nlohmann::ordered_json e;
    e["heading"] = s.heading;
    e["body"] = s.body;
    e["citations"] = s.citations;
    e["fallback"] = s.fallback;
    j["sections"].push_back(std::move(e));
  }
  j["references"] = nlohmann::ordered_json::array();
  for (const auto& [doc, url] : draft.references) j["references"].push_back({{"doc_index", doc}, {"url", url}});
  j["stop_reason"] = draft.stop_reason;
  return j;
}

}  // namespace biogen::pipeline
