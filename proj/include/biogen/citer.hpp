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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biogen/retriever.hpp"

namespace biogen::citer {

// Strictly increasing 0-based doc_index values.
using CitationList = std::vector<int>;

CitationList attribute(const retriever::RetrievedEvidence& evidence);
CitationList attribute(std::span<const int> doc_indexes);

// "[i+1,j+1,...]", or "" for an empty list.
std::string render(const CitationList& citations);

// Inverse of render. Throws std::invalid_argument on malformed input.
CitationList parse(std::string_view rendered);

}  // namespace biogen::citer
