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

#include "biogen/text/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace biogen::text {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool attaches_left(std::string_view tok) {
  return tok == "." || tok == "," || tok == "!" || tok == "?" || tok == ";" || tok == ":" || tok == ")" ||
         tok == "%";
}

bool ends_sentence(std::string_view tok) { return tok == "." || tok == "!" || tok == "?"; }

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<std::string> tokenize_cased(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, text[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  auto toks = tokenize_cased(text);
  for (auto& t : toks) t = to_lower(t);
  return toks;
}

bool is_punctuation_token(std::string_view token) {
  return !token.empty() && !is_word_byte(static_cast<unsigned char>(token.front()));
}

std::vector<std::string> sentence_split(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size() && is_space(static_cast<unsigned char>(text[start]))) ++start;
  std::size_t i = start;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      std::size_t k = i + 1;
      while (k < text.size() && is_space(static_cast<unsigned char>(text[k]))) ++k;
      const bool at_end = k == text.size();
      const bool had_space = k > i + 1;
      if (at_end || (had_space && std::isupper(static_cast<unsigned char>(text[k])))) {
        out.emplace_back(text.substr(start, i + 1 - start));
        start = k;
        i = k;
        continue;
      }
    }
    ++i;
  }
  if (start < text.size()) {
    std::size_t end = text.size();
    while (end > start && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
    if (end > start) out.emplace_back(text.substr(start, end - start));
  }
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(static_cast<unsigned char>(c))) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

Vocabulary::Vocabulary() {
  for (auto t : kReservedTokens) {
    index_.emplace(std::string(t), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(t);
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t max_size) {
  if (max_size <= static_cast<std::size_t>(kNumReserved)) {
    throw std::invalid_argument("vocabulary max_size must exceed the reserved token count");
  }
  std::unordered_map<std::string, std::size_t> counts;
  std::unordered_map<std::string, std::map<std::string, std::size_t>> surface;
  for (const auto& text : texts) {
    for (auto& cased : tokenize_cased(text)) {
      auto lower = to_lower(cased);
      ++counts[lower];
      ++surface[lower][cased];
    }
  }
  Vocabulary v;
  std::vector<std::pair<std::string, std::size_t>> ranked;
  ranked.reserve(counts.size());
  for (auto& [tok, n] : counts) {
    if (!v.contains(tok)) ranked.emplace_back(tok, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const std::size_t room = max_size - v.size();
  if (ranked.size() > room) ranked.resize(room);
  for (auto& [tok, n] : ranked) {
    v.index_.emplace(tok, static_cast<TokenId>(v.tokens_.size()));
    v.tokens_.push_back(tok);
    const auto& forms = surface[tok];
    const auto best = std::max_element(forms.begin(), forms.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;  // first maximum wins: lexicographically smallest on ties
    });
    if (best->first != tok) v.casing_.emplace(tok, best->first);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < static_cast<std::size_t>(kNumReserved)) {
    throw std::invalid_argument("vocabulary is missing reserved tokens");
  }
  for (TokenId i = 0; i < kNumReserved; ++i) {
    if (tokens[static_cast<std::size_t>(i)] != kReservedTokens[i]) {
      throw std::invalid_argument("vocabulary reserved token mismatch at id " + std::to_string(i));
    }
  }
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  for (auto& t : tokens) {
    if (!v.index_.emplace(t, static_cast<TokenId>(v.tokens_.size())).second) {
      throw std::invalid_argument("duplicate vocabulary token: " + t);
    }
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  const auto toks = tokenize(text);
  return encode_tokens(toks);
}

std::vector<TokenId> Vocabulary::encode_tokens(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

std::string Vocabulary::render(std::span<const TokenId> ids) const {
  std::string out;
  bool capitalize = true;
  bool glue_next = false;
  for (TokenId id : ids) {
    const std::string& tok = token(id);
    if (id < kNumReserved) continue;
    std::string form = tok;
    if (auto it = casing_.find(tok); it != casing_.end()) form = it->second;
    if (capitalize && !form.empty() && std::islower(static_cast<unsigned char>(form[0]))) {
      form[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(form[0])));
    }
    if (!out.empty() && !attaches_left(tok) && !glue_next) out += ' ';
    out += form;
    glue_next = tok == "(";
    if (ends_sentence(tok)) {
      capitalize = true;
    } else if (!is_punctuation_token(tok)) {
      capitalize = false;
    }
  }
  return out;
}

std::uint64_t Vocabulary::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& t : tokens_) {
    for (unsigned char c : t) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0x0a;
    h *= 1099511628211ULL;
  }
  return h;
}

void Vocabulary::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open vocabulary for writing: " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw std::runtime_error("failed writing vocabulary: " + path.string());
}

Vocabulary Vocabulary::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) tokens.push_back(line);
  return from_tokens(std::move(tokens));
}

}  // namespace biogen::text
