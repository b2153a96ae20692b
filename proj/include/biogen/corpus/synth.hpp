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
#include <map>
#include <string>
#include <vector>

#include "biogen/corpus/corpus.hpp"

namespace biogen::corpus {

struct SynthConfig {
  // Same-named people with a different occupation and different facts.
  bool distractors = true;
  int homonym_docs = 3;
  // Documents about unrelated people.
  int noise_docs = 2;
  // Probability of an extra hit on a wikipedia.org host (removed by filter_hits).
  double wikipedia_rate = 0.25;
  double second_occupation_rate = 0.3;
  // Low-evidence variant: toplevel and career sections only, and the profile
  // document is present with probability `profile_rate`.
  bool low_evidence = false;
  double profile_rate = 0.35;
  std::string id_prefix = "bio";

  static SynthConfig low_evidence_split();
};

enum class DocKind { kProfile, kEarlyLife, kCareer, kHomonym, kNoise, kWikipedia };

const char* doc_kind_name(DocKind kind);

struct PlantedFact {
  std::string name;      // e.g. "city"
  std::string value;     // the verbatim string
  std::string heading;   // gold section containing it
};

struct SynthRecord {
  Biography bio;
  std::vector<DocKind> hit_kinds;  // aligned with bio.web_hits
  std::vector<PlantedFact> facts;
  // Entity strings the gold text is built to expose (original casing).
  std::vector<std::string> entities;
};

std::vector<SynthRecord> synth_generate_detailed(std::uint64_t seed, int n_bios, const SynthConfig& config = {});
std::vector<Biography> synth_generate(std::uint64_t seed, int n_bios, const SynthConfig& config = {});

}  // namespace biogen::corpus
