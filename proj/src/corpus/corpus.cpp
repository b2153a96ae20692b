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

#include "biogen/corpus/corpus.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <unordered_set>

#include "biogen/log.hpp"
#include "biogen/text/text.hpp"

namespace biogen::corpus {
namespace {

using nlohmann::ordered_json;

const std::set<std::string> kBioFields = {"id", "name", "occupations", "sections", "web_hits"};
const std::set<std::string> kSectionFields = {"heading", "text"};
const std::set<std::string> kHitFields = {"url", "title", "text"};

void check_fields(const ordered_json& obj, const std::set<std::string>& allowed, const char* what,
                  std::size_t line, const LoadOptions& options) {
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key())) continue;
    const std::string msg = std::string("unknown ") + what + " field '" + item.key() + "'";
    if (options.strict) throw CorpusError(line, msg);
    log::warn("line " + std::to_string(line) + ": " + msg + " ignored");
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) throw CorpusError(line, std::string("missing ") + what + " field '" + key + "'");
  }
}

const std::string& get_string(const ordered_json& obj, const char* key, std::size_t line) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw CorpusError(line, std::string("field '") + key + "' must be a string");
  return v.get_ref<const std::string&>();
}

Biography parse_record(const ordered_json& j, std::size_t line, const LoadOptions& options) {
  if (!j.is_object()) throw CorpusError(line, "record must be a JSON object");
  check_fields(j, kBioFields, "record", line, options);
  Biography bio;
  bio.id = get_string(j, "id", line);
  bio.name = get_string(j, "name", line);
  if (!j.at("occupations").is_array()) throw CorpusError(line, "occupations must be an array");
  for (const auto& o : j.at("occupations")) {
    if (!o.is_string()) throw CorpusError(line, "occupations must contain strings");
    bio.occupations.push_back(o.get<std::string>());
  }
  if (!j.at("sections").is_array()) throw CorpusError(line, "sections must be an array");
  for (const auto& s : j.at("sections")) {
    if (!s.is_object()) throw CorpusError(line, "section must be an object");
    check_fields(s, kSectionFields, "section", line, options);
    bio.sections.push_back(Section{get_string(s, "heading", line), get_string(s, "text", line)});
  }
  if (!j.at("web_hits").is_array()) throw CorpusError(line, "web_hits must be an array");
  int index = 0;
  for (const auto& h : j.at("web_hits")) {
    if (!h.is_object()) throw CorpusError(line, "web hit must be an object");
    check_fields(h, kHitFields, "web hit", line, options);
    bio.web_hits.push_back(
        EvidenceDocument{index++, get_string(h, "url", line), get_string(h, "title", line), get_string(h, "text", line)});
  }
  return bio;
}

}  // namespace

std::string Biography::text() const {
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

void validate(const Biography& bio) {
  if (bio.id.empty()) throw ValidationError("biography id must be non-empty");
  if (bio.name.empty()) throw ValidationError("biography '" + bio.id + "' has an empty name");
  if (bio.occupations.empty()) throw ValidationError("biography '" + bio.id + "' has no occupations");
  if (bio.sections.empty() || bio.sections.front().heading != kTopLevel) {
    throw ValidationError("biography '" + bio.id + "' must start with a toplevel section");
  }
  for (const auto& s : bio.sections) {
    if (s.heading.empty()) throw ValidationError("biography '" + bio.id + "' has an empty heading");
  }
  std::unordered_set<int> seen;
  for (const auto& h : bio.web_hits) {
    if (h.url.empty()) throw ValidationError("biography '" + bio.id + "' has a hit without url");
    if (!seen.insert(h.doc_index).second) throw ValidationError("biography '" + bio.id + "' repeats a doc_index");
  }
}

std::vector<Biography> parse_corpus(std::istream& in, const LoadOptions& options) {
  std::vector<Biography> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(number, std::string("malformed JSON: ") + e.what());
    }
    Biography bio = parse_record(j, number, options);
    try {
      validate(bio);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(number) + ": " + e.what());
    }
    out.push_back(std::move(bio));
  }
  return out;
}

std::vector<Biography> load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus: " + path.string());
  return parse_corpus(in, options);
}

std::string to_jsonl(const Biography& bio) {
  ordered_json j;
  j["id"] = bio.id;
  j["name"] = bio.name;
  j["occupations"] = bio.occupations;
  j["sections"] = ordered_json::array();
  for (const auto& s : bio.sections) j["sections"].push_back({{"heading", s.heading}, {"text", s.text}});
  j["web_hits"] = ordered_json::array();
  for (const auto& h : bio.web_hits) j["web_hits"].push_back({{"url", h.url}, {"title", h.title}, {"text", h.text}});
  return j.dump();
}

void write_corpus(std::ostream& out, std::span<const Biography> corpus) {
  for (const auto& bio : corpus) out << to_jsonl(bio) << '\n';
}

void write_corpus(const std::filesystem::path& path, std::span<const Biography> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_corpus(out, corpus);
  if (!out) throw std::runtime_error("failed writing corpus: " + path.string());
}

std::string url_host(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return {};
  const std::string name = text::to_lower(url.substr(0, scheme));
  if (name != "http" && name != "https") return {};
  std::string_view rest = url.substr(scheme + 3);
  const auto end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
  if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  while (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);
  return text::to_lower(authority);
}

std::vector<EvidenceDocument> filter_hits(std::span<const EvidenceDocument> hits, std::size_t cap) {
  if (cap == 0) throw std::invalid_argument("hit cap must be positive");
  std::vector<EvidenceDocument> out;
  for (const auto& h : hits) {
    const std::string host = url_host(h.url);
    constexpr std::string_view kWiki = "wikipedia.org";
    const bool wiki = host == kWiki || (host.size() > kWiki.size() && host.ends_with(kWiki) &&
                                        host[host.size() - kWiki.size() - 1] == '.');
    if (wiki) continue;
    if (out.size() == cap) break;
    out.push_back(h);
    out.back().doc_index = static_cast<int>(out.size() - 1);
  }
  return out;
}

namespace {

std::unordered_set<std::string> word_unigrams(std::string_view text) {
  std::unordered_set<std::string> out;
  for (auto& t : text::tokenize(text)) {
    if (!text::is_punctuation_token(t)) out.insert(std::move(t));
  }
  return out;
}

}  // namespace

double unigram_overlap(std::string_view biography_text, std::span<const EvidenceDocument> hits) {
  const auto bio = word_unigrams(biography_text);
  if (bio.empty()) return 0.0;
  std::unordered_set<std::string> evidence;
  for (const auto& h : hits) {
    auto u = word_unigrams(h.text);
    evidence.insert(u.begin(), u.end());
  }
  std::size_t shared = 0;
  for (const auto& t : bio) shared += evidence.count(t);
  return static_cast<double>(shared) / static_cast<double>(bio.size());
}

DatasetStats corpus_stats(std::span<const Biography> corpus) {
  if (corpus.empty()) throw std::invalid_argument("corpus_stats: empty corpus");
  DatasetStats s;
  std::size_t sections = 0;
  double section_words = 0.0;
  for (const auto& bio : corpus) {
    double article = 0.0;
    for (const auto& sec : bio.sections) {
      const double w = static_cast<double>(text::word_count(sec.text));
      section_words += w;
      article += w;
      ++sections;
    }
    s.avg_sections += static_cast<double>(bio.sections.size());
    s.avg_article_len += article;
    s.avg_hits += static_cast<double>(bio.web_hits.size());
    s.avg_overlap += unigram_overlap(bio.text(), bio.web_hits);
  }
  const double n = static_cast<double>(corpus.size());
  s.avg_sections /= n;
  s.avg_article_len /= n;
  s.avg_hits /= n;
  s.avg_overlap /= n;
  s.avg_section_len = sections ? section_words / static_cast<double>(sections) : 0.0;
  s.biographies = corpus.size();
  return s;
}

}  // namespace biogen::corpus
