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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace biogen::text {

using TokenId = std::int32_t;

// Reserved ids occupy the first slots of every vocabulary.
inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kSep = 3;
inline constexpr TokenId kNextHeading = 4;
inline constexpr TokenId kEndArticle = 5;
inline constexpr TokenId kUnk = 6;
inline constexpr TokenId kNumReserved = 7;

inline constexpr std::string_view kReservedTokens[kNumReserved] = {
    "<pad>", "<s>", "</s>", "<sep>", "<next_heading>", "<end_article>", "<unk>"};

// Word-level split: maximal runs of alphanumerics (and non-ASCII bytes), every
// other non-space character is its own token. Casing is preserved.
std::vector<std::string> tokenize_cased(std::string_view text);
// As above, lowercased.
std::vector<std::string> tokenize(std::string_view text);

bool is_punctuation_token(std::string_view token);

// Splits after '.', '!' or '?' when followed by whitespace and an uppercase
// letter, or by the end of the text. Inter-sentence whitespace is dropped and
// every other character is kept.
std::vector<std::string> sentence_split(std::string_view text);

std::size_t word_count(std::string_view text);

std::string to_lower(std::string_view s);

class Vocabulary {
 public:
  // Reserved tokens only.
  Vocabulary();

  // Most frequent lowercased tokens, ties broken lexicographically, capped so
  // that size() <= max_size. Records the most frequent original casing of
  // each kept token for `render`.
  static Vocabulary build(std::span<const std::string> texts, std::size_t max_size);

  // From an ordered token list whose first entries are the reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;

  std::vector<TokenId> encode(std::string_view text) const;
  std::vector<TokenId> encode_tokens(std::span<const std::string> tokens) const;
  // Space-joined token strings.
  std::string decode(std::span<const TokenId> ids) const;
  // Reader-facing text: reserved tokens dropped, preferred casing restored,
  // punctuation attached and sentence starts capitalised.
  std::string render(std::span<const TokenId> ids) const;

  const std::map<std::string, std::string>& casing() const { return casing_; }
  void set_casing(std::map<std::string, std::string> casing) { casing_ = std::move(casing); }

  // FNV-1a over the token list.
  std::uint64_t fingerprint() const;

  // One token per line; the line index is the id.
  void write(const std::filesystem::path& path) const;
  static Vocabulary read(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::map<std::string, std::string> casing_;
};

}  // namespace biogen::text
