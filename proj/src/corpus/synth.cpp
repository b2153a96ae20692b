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

#include "biogen/corpus/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "biogen/numerics/random.hpp"
#include "biogen/text/text.hpp"

namespace biogen::corpus {
namespace {

// Pools are drawn once from a fixed stream so that every generated corpus,
// whatever its seed, shares one closed vocabulary of invented names.
constexpr std::uint64_t kPoolSeed = 0x5eedb10c;

struct Pools {
  std::vector<std::string> first, last, country, award, city, employer, lab;
  std::vector<std::string> occupations = {"chemist",   "painter",  "architect", "economist", "botanist",  "novelist",
                                          "engineer",  "sculptor", "historian", "physician", "composer", "linguist"};
  std::vector<std::string> parents = {"baker", "farmer", "miner",  "tailor", "sailor",
                                      "teacher", "carpenter", "weaver", "clerk", "potter"};
};

std::string invent_word(Rng& rng) {
  static constexpr std::array<const char*, 16> kOnsets = {"b", "c", "d", "f", "g", "k", "l", "m",
                                                          "n", "p", "r", "s", "t", "v", "z", "br"};
  static constexpr std::array<const char*, 6> kVowels = {"a", "e", "i", "o", "u", "ai"};
  static constexpr std::array<const char*, 6> kCodas = {"", "n", "r", "l", "s", "th"};
  const int syllables = 2 + static_cast<int>(rng.index(2));
  std::string w;
  for (int s = 0; s < syllables; ++s) {
    w += kOnsets[rng.index(kOnsets.size())];
    w += kVowels[rng.index(kVowels.size())];
  }
  w += kCodas[rng.index(kCodas.size())];
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

const Pools& pools() {
  static const Pools p = [] {
    Pools out;
    Rng rng(kPoolSeed);
    std::set<std::string> used;
    auto fill = [&](std::vector<std::string>& pool, std::size_t n) {
      while (pool.size() < n) {
        auto w = invent_word(rng);
        if (used.insert(text::to_lower(w)).second) pool.push_back(w);
      }
    };
    fill(out.first, 40);
    fill(out.last, 40);
    fill(out.country, 16);
    fill(out.award, 16);
    fill(out.city, 24);
    fill(out.employer, 16);
    fill(out.lab, 16);
    return out;
  }();
  return p;
}

struct Person {
  std::string first, last;
  std::vector<std::string> occupations;
  std::string country, award, city, year, parent, employer, join_year, lab;

  std::string full_name() const { return first + " " + last; }
};

const std::string& pick(Rng& rng, const std::vector<std::string>& pool) { return pool[rng.index(pool.size())]; }

// Draws from `pool` avoiding `avoid`.
std::string pick_except(Rng& rng, const std::vector<std::string>& pool, const std::string& avoid) {
  for (;;) {
    const auto& w = pick(rng, pool);
    if (w != avoid) return w;
  }
}

std::string year_in(Rng& rng, int lo, int hi, const std::string& avoid = {}) {
  for (;;) {
    auto y = std::to_string(lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo + 1))));
    if (y != avoid) return y;
  }
}

std::string article(const std::string& noun) {
  return std::string("aeiou").find(noun.front()) != std::string::npos ? "an" : "a";
}

std::string occupation_phrase(const Person& p) {
  std::string s = article(p.occupations[0]) + " " + p.occupations[0];
  if (p.occupations.size() > 1) s += " and " + p.occupations[1];
  return s;
}

// A person whose every fact differs from `other` (when given).
Person make_person(Rng& rng, const Person* other, double second_occupation_rate) {
  const auto& P = pools();
  Person p;
  p.first = pick(rng, P.first);
  p.last = pick(rng, P.last);
  p.occupations.push_back(pick(rng, P.occupations));
  if (rng.bernoulli(second_occupation_rate)) p.occupations.push_back(pick_except(rng, P.occupations, p.occupations[0]));
  const Person none;
  const Person& o = other ? *other : none;
  p.country = pick_except(rng, P.country, o.country);
  p.award = pick_except(rng, P.award, o.award);
  p.city = pick_except(rng, P.city, o.city);
  p.year = year_in(rng, 1900, 1949, o.year);
  p.parent = pick_except(rng, P.parents, o.parent);
  p.employer = pick_except(rng, P.employer, o.employer);
  p.join_year = year_in(rng, 1950, 1989, o.join_year);
  p.lab = pick_except(rng, P.lab, o.lab);
  return p;
}

std::string slug(const Person& p) { return text::to_lower(p.first) + "-" + text::to_lower(p.last); }

// Page boilerplate. It carries no name, so it never looks relevant to a query.
std::string filler(Rng& rng) {
  static constexpr std::array<const char*, 4> kFillers = {
      "Readers often ask about this page.", "This page was updated with new notes.",
      "Several archives hold related records.", "More records may follow soon."};
  return kFillers[rng.index(kFillers.size())];
}

EvidenceDocument profile_doc(Rng& rng, const Person& p, int serial) {
  const auto& o = p.occupations[0];
  EvidenceDocument d;
  d.url = "https://www.peopledb.example/" + slug(p) + "?r=" + std::to_string(serial);
  d.title = p.full_name() + " profile";
  d.text = p.full_name() + " is " + occupation_phrase(p) + " from " + p.country + ". The " + o + " " + p.full_name() +
           " won the " + p.award + " award. " + filler(rng);
  return d;
}

EvidenceDocument early_doc(Rng& rng, const Person& p, int serial) {
  const auto& o = p.occupations[0];
  EvidenceDocument d;
  d.url = "https://history.example/" + slug(p) + "/early?r=" + std::to_string(serial);
  d.title = p.full_name() + " early life";
  d.text = "In early life, the " + o + " " + p.full_name() + " was born in " + p.city + " in " + p.year +
           ". In early life, the father of the " + o + " " + p.full_name() + " was " + article(p.parent) + " " +
           p.parent + ". " + filler(rng);
  return d;
}

EvidenceDocument career_doc(Rng& rng, const Person& p, int serial) {
  const auto& o = p.occupations[0];
  EvidenceDocument d;
  d.url = "https://careers.example/" + slug(p) + "?r=" + std::to_string(serial);
  d.title = p.full_name() + " career";
  d.text = "In career terms, the " + o + " " + p.full_name() + " joined " + p.employer + " in " + p.join_year +
           ". In career terms, the " + o + " " + p.full_name() + " later led the " + p.lab + " lab. " + filler(rng);
  return d;
}

std::vector<Section> gold_sections(const Person& p, bool low_evidence) {
  std::vector<Section> s;
  s.push_back({std::string(kTopLevel), p.full_name() + " is " + occupation_phrase(p) + " from " + p.country + ". " +
                                           p.last + " won the " + p.award + " award."});
  if (!low_evidence) {
    s.push_back({"early life", p.last + " was born in " + p.city + " in " + p.year + ". The father of " + p.last +
                                   " was " + article(p.parent) + " " + p.parent + "."});
  }
  s.push_back({"career", p.last + " joined " + p.employer + " in " + p.join_year + " as " + article(p.occupations[0]) +
                             " " + p.occupations[0] + ". " + p.last + " later led the " + p.lab + " lab."});
  return s;
}

std::vector<PlantedFact> planted(const Person& p, bool low_evidence) {
  std::vector<PlantedFact> f = {{"country", p.country, "toplevel"}, {"award", p.award, "toplevel"}};
  if (!low_evidence) {
    f.push_back({"city", p.city, "early life"});
    f.push_back({"birth_year", p.year, "early life"});
    f.push_back({"parent", p.parent, "early life"});
  }
  f.push_back({"employer", p.employer, "career"});
  f.push_back({"join_year", p.join_year, "career"});
  f.push_back({"lab", p.lab, "career"});
  return f;
}

}  // namespace

SynthConfig SynthConfig::low_evidence_split() {
  SynthConfig c;
  c.low_evidence = true;
  c.id_prefix = "low";
  return c;
}

const char* doc_kind_name(DocKind kind) {
  switch (kind) {
    case DocKind::kProfile: return "profile";
    case DocKind::kEarlyLife: return "early_life";
    case DocKind::kCareer: return "career";
    case DocKind::kHomonym: return "homonym";
    case DocKind::kNoise: return "noise";
    case DocKind::kWikipedia: return "wikipedia";
  }
  return "unknown";
}

std::vector<SynthRecord> synth_generate_detailed(std::uint64_t seed, int n_bios, const SynthConfig& config) {
  if (n_bios <= 0) throw std::invalid_argument("synth_generate: n_bios must be positive");
  Rng rng(seed);
  std::vector<SynthRecord> out;
  out.reserve(static_cast<std::size_t>(n_bios));
  for (int i = 0; i < n_bios; ++i) {
    const Person subject = make_person(rng, nullptr, config.second_occupation_rate);
    SynthRecord rec;
    char id[64];
    std::snprintf(id, sizeof id, "%s-%06d", config.id_prefix.c_str(), i);
    rec.bio.id = id;
    rec.bio.name = subject.full_name();
    rec.bio.occupations = subject.occupations;
    rec.bio.sections = gold_sections(subject, config.low_evidence);
    rec.facts = planted(subject, config.low_evidence);
    rec.entities = {subject.full_name(), subject.country, subject.award, subject.employer, subject.lab};
    if (!config.low_evidence) rec.entities.push_back(subject.city);

    std::vector<std::pair<DocKind, EvidenceDocument>> docs;
    int serial = 0;
    if (!config.low_evidence || rng.bernoulli(config.profile_rate)) {
      docs.emplace_back(DocKind::kProfile, profile_doc(rng, subject, serial++));
    }
    if (!config.low_evidence) docs.emplace_back(DocKind::kEarlyLife, early_doc(rng, subject, serial++));
    docs.emplace_back(DocKind::kCareer, career_doc(rng, subject, serial++));

    if (config.distractors && config.homonym_docs > 0) {
      Person twin = make_person(rng, &subject, 0.0);
      twin.first = subject.first;
      twin.last = subject.last;
      twin.occupations = {subject.occupations[0]};
      while (std::find(subject.occupations.begin(), subject.occupations.end(), twin.occupations[0]) !=
             subject.occupations.end()) {
        twin.occupations[0] = pick(rng, pools().occupations);
      }
      for (int h = 0; h < config.homonym_docs; ++h) {
        const int kind = config.low_evidence ? (h % 2 == 0 ? 0 : 2) : h % 3;
        auto d = kind == 0 ? profile_doc(rng, twin, serial++)
                           : kind == 1 ? early_doc(rng, twin, serial++) : career_doc(rng, twin, serial++);
        docs.emplace_back(DocKind::kHomonym, std::move(d));
      }
    }
    for (int n = 0; n < config.noise_docs; ++n) {
      Person other = make_person(rng, &subject, config.second_occupation_rate);
      while (other.full_name() == subject.full_name()) other.last = pick(rng, pools().last);
      const auto kind = rng.index(3);
      auto d = kind == 0 ? profile_doc(rng, other, serial++)
                         : kind == 1 ? early_doc(rng, other, serial++) : career_doc(rng, other, serial++);
      docs.emplace_back(DocKind::kNoise, std::move(d));
    }
    if (rng.bernoulli(config.wikipedia_rate)) {
      EvidenceDocument w;
      w.url = "https://en.wikipedia.org/wiki/" + subject.first + "_" + subject.last;
      w.title = subject.full_name() + " - Wikipedia";
      w.text = rec.bio.text();
      docs.emplace_back(DocKind::kWikipedia, std::move(w));
    }
    // Search-engine order is arbitrary.
    for (std::size_t k = docs.size(); k > 1; --k) std::swap(docs[k - 1], docs[rng.index(k)]);
    for (std::size_t k = 0; k < docs.size(); ++k) {
      docs[k].second.doc_index = static_cast<int>(k);
      rec.hit_kinds.push_back(docs[k].first);
      rec.bio.web_hits.push_back(std::move(docs[k].second));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Biography> synth_generate(std::uint64_t seed, int n_bios, const SynthConfig& config) {
  auto detailed = synth_generate_detailed(seed, n_bios, config);
  std::vector<Biography> out;
  out.reserve(detailed.size());
  for (auto& r : detailed) out.push_back(std::move(r.bio));
  return out;
}

}  // namespace biogen::corpus
