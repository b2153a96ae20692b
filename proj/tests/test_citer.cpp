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

#include <doctest.h>

#include <set>
#include <stdexcept>
#include <vector>

#include "biogen/citer.hpp"
#include "biogen/numerics/random.hpp"

using namespace biogen;
using namespace biogen::citer;

TEST_SUITE("citer") {
  TEST_CASE("attribution deduplicates and sorts") {
    const std::vector<int> docs{2, 5, 2};
    CHECK(attribute(docs) == CitationList{2, 5});
    retriever::RetrievedEvidence one;
    one.items.push_back({{}, 0, 0, 3, 0.0, 1.0});
    CHECK(attribute(one) == CitationList{0});
    CHECK(attribute(retriever::RetrievedEvidence{}).empty());
  }

  TEST_CASE("attribution matches a provenance scan") {
    Rng rng(4);
    const std::vector<int> pool{7, 1, 3};
    retriever::RetrievedEvidence ev;
    for (int i = 0; i < 40; ++i) ev.items.push_back({{}, pool[rng.index(3)], i, 1, 0.0, 0.025});
    std::set<int> seen;
    for (int d = 0; d < 10; ++d) {
      for (const auto& item : ev.items) {
        if (item.doc_index == d) seen.insert(d);
      }
    }
    CHECK(attribute(ev) == CitationList(seen.begin(), seen.end()));
    CHECK(attribute(ev) == CitationList{1, 3, 7});
  }

  TEST_CASE("rendering is one-based") {
    CHECK(render({0, 2, 3}) == "[1,3,4]");
    CHECK(render({}) == "");
    CHECK(render({6}) == "[7]");
  }

  TEST_CASE("parse inverts render") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      std::set<int> s;
      const auto n = rng.index(8);
      for (std::uint64_t k = 0; k < n; ++k) s.insert(static_cast<int>(rng.index(30)));
      const CitationList c(s.begin(), s.end());
      CHECK(parse(render(c)) == c);
    }
  }

  TEST_CASE("malformed lists are rejected") {
    for (const char* bad : {"[", "[]", "1,2", "[0]", "[2,1]", "[1,,2]", "[a]", "[1 ,2]", "[3,3]"}) {
      CHECK_THROWS_AS(parse(bad), std::invalid_argument);
    }
  }
}
