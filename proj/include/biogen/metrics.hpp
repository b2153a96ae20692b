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
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biogen/retriever.hpp"

namespace biogen::metrics {

struct Rouge {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Lowercased word tokens with punctuation removed.
std::vector<std::string> metric_tokens(std::string_view text);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

Rouge rouge_l(std::span<const std::string> generated, std::span<const std::string> reference);
Rouge rouge_l(std::string_view generated, std::string_view reference);

// Returns true when the two sentences are judged equivalent.
using Scorer = std::function<bool(const std::string& a, const std::string& b)>;

// Lowercased, punctuation- and stopword-free tokens.
std::vector<std::string> content_tokens(std::string_view text);
// Clipped bag-of-words F1 over content tokens.
double content_f1(std::string_view a, std::string_view b);
// content_f1 >= 0.8.
bool default_scorer(const std::string& a, const std::string& b);

// Fraction of generated sentences with at least one reference sentence that
// the scorer accepts in both directions. No generated sentences gives 0.
double equivalence_rate(std::string_view generated, std::string_view reference, const Scorer& scorer = default_scorer);

using Extractor = std::function<std::set<std::string>(std::string_view)>;

// Capitalised word runs not at a sentence start, plus sentence-initial runs
// of two or more words; lowercased.
std::set<std::string> default_extractor(std::string_view text);

struct Coverage {
  double value = 1.0;
  bool vacuous = false;  // the reference had no entities
};

Coverage entity_coverage(std::string_view generated, std::string_view reference,
                         const Extractor& extractor = default_extractor);

struct SectionConcentration {
  std::map<int, int> histogram;  // doc_index -> selected sentences
  double max_fraction = 0.0;
};

struct Concentration {
  std::vector<SectionConcentration> sections;
  // Over sections with at least one selected sentence.
  double mean_max_fraction = 0.0;
};

// Throws std::invalid_argument when no record holds any evidence.
Concentration retrieval_concentration(std::span<const retriever::RetrievedEvidence> evidence);

}  // namespace biogen::metrics
