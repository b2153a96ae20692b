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

#include "biogen/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "biogen/log.hpp"
#include "biogen/text/text.hpp"

namespace biogen::metrics {
namespace {

// Function words only; pronouns stay, since they carry who a sentence is about.
const std::unordered_set<std::string> kStopwords = {
    "a",  "an",   "the", "of",   "in",  "on",   "at",    "to",   "for",  "from", "by",   "with",
    "as", "and",  "or",  "but",  "is",  "was",  "were",  "are",  "be",   "been", "being", "has",
    "have", "had", "that", "this", "which", "it", "its"};

bool capitalized(const std::string& tok) {
  return !tok.empty() && std::isupper(static_cast<unsigned char>(tok.front())) != 0;
}

}  // namespace

std::vector<std::string> metric_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : text::tokenize(text)) {
    if (!text::is_punctuation_token(t)) out.push_back(std::move(t));
  }
  return out;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Rouge rouge_l(std::span<const std::string> generated, std::span<const std::string> reference) {
  if (generated.empty() && reference.empty()) return {1.0, 1.0, 1.0};
  if (generated.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(generated, reference));
  Rouge r;
  r.precision = lcs / static_cast<double>(generated.size());
  r.recall = lcs / static_cast<double>(reference.size());
  r.f1 = lcs == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Rouge rouge_l(std::string_view generated, std::string_view reference) {
  return rouge_l(metric_tokens(generated), metric_tokens(reference));
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : metric_tokens(text)) {
    if (!kStopwords.count(t)) out.push_back(std::move(t));
  }
  return out;
}

double content_f1(std::string_view a, std::string_view b) {
  const auto ta = content_tokens(a);
  const auto tb = content_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : tb) ++counts[t];
  double overlap = 0.0;
  for (const auto& t : ta) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      overlap += 1.0;
    }
  }
  if (overlap == 0.0) return 0.0;
  const double p = overlap / static_cast<double>(ta.size());
  const double r = overlap / static_cast<double>(tb.size());
  return 2.0 * p * r / (p + r);
}

bool default_scorer(const std::string& a, const std::string& b) { return content_f1(a, b) >= 0.8; }

double equivalence_rate(std::string_view generated, std::string_view reference, const Scorer& scorer) {
  const auto gen = text::sentence_split(generated);
  if (gen.empty()) {
    log::warn("equivalence_rate: no generated sentences");
    return 0.0;
  }
  const auto ref = text::sentence_split(reference);
  std::size_t matched = 0;
  for (const auto& g : gen) {
    for (const auto& r : ref) {
      if (scorer(g, r) && scorer(r, g)) {
        ++matched;
        break;
      }
    }
  }
  return static_cast<double>(matched) / static_cast<double>(gen.size());
}

std::set<std::string> default_extractor(std::string_view text) {
  std::set<std::string> out;
  for (const auto& sentence : text::sentence_split(text)) {
    const auto tokens = text::tokenize_cased(sentence);
    std::vector<std::string> run;
    bool run_at_start = false;
    bool seen_word = false;
    auto flush = [&] {
      if (!run.empty() && (!run_at_start || run.size() >= 2)) {
        std::string entity;
        for (const auto& w : run) {
          if (!entity.empty()) entity += ' ';
          entity += text::to_lower(w);
        }
        out.insert(entity);
      }
      run.clear();
    };
    for (const auto& t : tokens) {
      if (text::is_punctuation_token(t)) {
        flush();
        continue;
      }
      if (capitalized(t)) {
        if (run.empty()) run_at_start = !seen_word;
        run.push_back(t);
      } else {
        flush();
      }
      seen_word = true;
    }
    flush();
  }
  return out;
}

Coverage entity_coverage(std::string_view generated, std::string_view reference, const Extractor& extractor) {
  const auto ref = extractor(reference);
  if (ref.empty()) return {1.0, true};
  const auto gen = extractor(generated);
  std::size_t hit = 0;
  for (const auto& e : ref) hit += gen.count(e);
  return {static_cast<double>(hit) / static_cast<double>(ref.size()), false};
}

Concentration retrieval_concentration(std::span<const retriever::RetrievedEvidence> evidence) {
  Concentration c;
  double sum = 0.0;
  std::size_t counted = 0;
  for (const auto& ev : evidence) {
    SectionConcentration s;
    for (const auto& item : ev.items) ++s.histogram[item.doc_index];
    if (!ev.items.empty()) {
      int top = 0;
      for (const auto& [doc, n] : s.histogram) top = std::max(top, n);
      s.max_fraction = static_cast<double>(top) / static_cast<double>(ev.items.size());
      sum += s.max_fraction;
      ++counted;
    }
    c.sections.push_back(std::move(s));
  }
  if (counted == 0) throw std::invalid_argument("retrieval_concentration: no evidence records");
  c.mean_max_fraction = sum / static_cast<double>(counted);
  return c;
}

}  // namespace biogen::metrics
