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

#include "biogen/citer.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace biogen::citer {

CitationList attribute(std::span<const int> doc_indexes) {
  CitationList out(doc_indexes.begin(), doc_indexes.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CitationList attribute(const retriever::RetrievedEvidence& evidence) {
  std::vector<int> docs;
  docs.reserve(evidence.items.size());
  for (const auto& item : evidence.items) docs.push_back(item.doc_index);
  return attribute(docs);
}

std::string render(const CitationList& citations) {
  if (citations.empty()) return "";
  std::string out = "[";
  for (std::size_t i = 0; i < citations.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(citations[i] + 1);
  }
  return out + "]";
}

CitationList parse(std::string_view rendered) {
  CitationList out;
  if (rendered.empty()) return out;
  if (rendered.size() < 3 || rendered.front() != '[' || rendered.back() != ']') {
    throw std::invalid_argument("citation list must look like [1,2]");
  }
  std::string_view body = rendered.substr(1, rendered.size() - 2);
  while (true) {
    const auto comma = body.find(',');
    const std::string_view part = body.substr(0, comma);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || value < 1) {
      throw std::invalid_argument("bad citation number: " + std::string(part));
    }
    if (!out.empty() && value - 1 <= out.back()) throw std::invalid_argument("citations must be increasing");
    out.push_back(value - 1);
    if (comma == std::string_view::npos) break;
    body = body.substr(comma + 1);
  }
  return out;
}

}  // namespace biogen::citer
