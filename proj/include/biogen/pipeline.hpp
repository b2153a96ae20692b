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

#include <functional>
#include <json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biogen/citer.hpp"
#include "biogen/corpus/corpus.hpp"
#include "biogen/model.hpp"

namespace biogen::pipeline {

struct PipelineConfig {
  int max_sections = 10;
  model::DecodeConstraints constraints;
};

struct DraftSection {
  std::string heading;
  std::string body;
  model::TokenSeq body_tokens;
  citer::CitationList citations;
  retriever::RetrievedEvidence evidence;
  bool fallback = false;  // retrieval found nothing; generated from the query alone
};

struct ArticleDraft {
  std::string name;
  std::vector<std::string> occupations;
  std::vector<DraftSection> sections;
  // Cited documents in doc_index order.
  std::vector<std::pair<int, std::string>> references;
  std::string stop_reason;

  // Bodies joined by single spaces.
  std::string text() const;
};

// Instrumentation. `before_section` sees the cache a section consumes;
// `after_section` sees the cache built from that section's decoder states.
struct PipelineHooks {
  std::function<void(std::size_t index, const model::SectionCache& cache, const retriever::RetrievedEvidence&)>
      before_section;
  std::function<void(std::size_t index, const DraftSection&, const model::SectionCache& next_cache)> after_section;
};

// Generates toplevel first, then follows generated headings until the model
// emits END_ARTICLE, repeats a heading, or max_sections is reached. `hits`
// should already be filtered.
ArticleDraft write_article(const std::string& name, const std::vector<std::string>& occupations,
                           std::span<const corpus::EvidenceDocument> hits, const Model& model,
                           const PipelineConfig& config = {}, const PipelineHooks& hooks = {});

std::string render_article(const ArticleDraft& draft);

struct ParsedSection {
  std::string heading;
  std::string body;
  citer::CitationList citations;
};

struct ParsedArticle {
  std::vector<ParsedSection> sections;
  std::vector<std::pair<int, std::string>> references;  // 0-based doc_index, url
};

// Structural parser for render_article output.
ParsedArticle parse_rendered(std::string_view rendered);

nlohmann::ordered_json draft_to_json(const ArticleDraft& draft, const std::string& id = {});

}  // namespace biogen::pipeline
