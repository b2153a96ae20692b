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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biogen::corpus {

inline constexpr std::string_view kTopLevel = "toplevel";
inline constexpr std::size_t kDefaultHitCap = 20;

struct EvidenceDocument {
  int doc_index = 0;
  std::string url;
  std::string title;
  std::string text;

  friend bool operator==(const EvidenceDocument&, const EvidenceDocument&) = default;
};

struct Section {
  std::string heading;
  std::string text;

  friend bool operator==(const Section&, const Section&) = default;
};

struct Biography {
  std::string id;
  std::string name;
  std::vector<std::string> occupations;
  std::vector<Section> sections;
  std::vector<EvidenceDocument> web_hits;

  // Section texts joined by single spaces.
  std::string text() const;

  friend bool operator==(const Biography&, const Biography&) = default;
};

struct DatasetStats {
  double avg_sections = 0.0;
  double avg_section_len = 0.0;
  double avg_article_len = 0.0;
  double avg_hits = 0.0;
  double avg_overlap = 0.0;
  std::size_t biographies = 0;
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LoadOptions {
  // Unknown fields are errors when strict, warnings otherwise.
  bool strict = true;
};

// Throws ValidationError on a broken invariant.
void validate(const Biography& bio);

std::vector<Biography> parse_corpus(std::istream& in, const LoadOptions& options = {});
std::vector<Biography> load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

std::string to_jsonl(const Biography& bio);
void write_corpus(std::ostream& out, std::span<const Biography> corpus);
void write_corpus(const std::filesystem::path& path, std::span<const Biography> corpus);

// Lowercased host of an http(s) URL, empty when it cannot be parsed.
std::string url_host(std::string_view url);

// Drops documents hosted on wikipedia.org (or a subdomain), keeps the first
// `cap` survivors in order and renumbers doc_index from 0.
std::vector<EvidenceDocument> filter_hits(std::span<const EvidenceDocument> hits, std::size_t cap = kDefaultHitCap);

// Fraction of the biography's unique word unigrams that occur in any hit.
double unigram_overlap(std::string_view biography_text, std::span<const EvidenceDocument> hits);

DatasetStats corpus_stats(std::span<const Biography> corpus);

}  // namespace biogen::corpus
