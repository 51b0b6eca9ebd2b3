// Copyright 2026 The Sketchguess Authors.
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

#include <algorithm>

#include "sketchguess/error.hpp"
#include "sketchguess/lexnet.hpp"

namespace sketchguess::lexnet {

std::string_view CriterionName(Criterion c) {
  switch (c) {
    case Criterion::kEM: return "EM";
    case Criterion::kSUB: return "SUB";
    case Criterion::kSYN: return "SYN";
    case Criterion::kHY: return "HY";
    case Criterion::kHYPC: return "HY-PC";
    case Criterion::kWUP: return "WUP";
  }
  return "?";
}

std::optional<Criterion> ParseCriterion(std::string_view name) {
  for (Criterion c : kAllCriteria) {
    if (CriterionName(c) == name) return c;
  }
  return std::nullopt;
}

CriteriaSet::CriteriaSet(std::initializer_list<Criterion> list, double threshold)
    : wup_threshold(threshold) {
  for (Criterion c : list) Add(c);
}

CriteriaSet CriteriaSet::Parse(std::string_view spec, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "WUP threshold must lie in (0,1]");
  }
  CriteriaSet out;
  out.wup_threshold = threshold;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t end = spec.find_first_of("|,", pos);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view name = spec.substr(pos, end - pos);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    auto c = ParseCriterion(name);
    if (!c) throw Error(ErrorCode::kInvalidArgument, "unknown criterion: " + std::string(name));
    out.Add(*c);
    pos = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "empty criteria set");
  return out;
}

CriteriaSet CriteriaSet::Default() {
  return CriteriaSet{Criterion::kEM, Criterion::kSUB, Criterion::kSYN};
}

std::string CriteriaSet::ToString() const {
  std::string out;
  for (Criterion c : kAllCriteria) {
    if (!Has(c)) continue;
    if (!out.empty()) out += '|';
    out += CriterionName(c);
  }
  return out;
}

namespace {

std::vector<std::string> SubTokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '-') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  std::sort(out.begin(), out.end());
  return out;
}

// Taxonomy lookups for a possibly multi-word phrase: the phrase itself when
// known, otherwise each known token.
std::vector<std::string> Lookups(std::string_view phrase, const Taxonomy& t) {
  if (t.Contains(phrase)) return {std::string(phrase)};
  std::vector<std::string> out;
  for (auto& tok : SubTokens(phrase)) {
    if (t.Contains(tok) && std::find(out.begin(), out.end(), tok) == out.end()) {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

}  // namespace

bool SubsetMatch(std::string_view guess, std::string_view truth) {
  auto g = SubTokens(guess);
  auto t = SubTokens(truth);
  if (g.empty() || t.empty()) return false;
  return std::includes(g.begin(), g.end(), t.begin(), t.end()) ||
         std::includes(t.begin(), t.end(), g.begin(), g.end());
}

MatchResult Match(std::string_view guess, std::string_view truth, const Taxonomy& taxonomy,
                  const CriteriaSet& criteria) {
  MatchResult r;
  r.fired.wup_threshold = criteria.wup_threshold;
  if (guess.empty() || truth.empty()) return r;

  if (criteria.Has(Criterion::kEM) && guess == truth) r.fired.Add(Criterion::kEM);
  if (criteria.Has(Criterion::kSUB) && SubsetMatch(guess, truth)) r.fired.Add(Criterion::kSUB);

  const bool taxonomic = criteria.Has(Criterion::kSYN) || criteria.Has(Criterion::kHY) ||
                         criteria.Has(Criterion::kHYPC) || criteria.Has(Criterion::kWUP);
  if (taxonomic) {
    const auto gs = Lookups(guess, taxonomy);
    const auto ts = Lookups(truth, taxonomy);
    for (const auto& g : gs) {
      for (const auto& t : ts) {
        if (criteria.Has(Criterion::kSYN) && taxonomy.AreSynonyms(g, t)) {
          r.fired.Add(Criterion::kSYN);
        }
        auto pg = taxonomy.Parent(g);
        auto pt = taxonomy.Parent(t);
        // Sharing only the artificial root says nothing about meaning.
        if (criteria.Has(Criterion::kHY) && pg && pt && *pg == *pt && *pg != taxonomy.root()) {
          r.fired.Add(Criterion::kHY);
        }
        if (criteria.Has(Criterion::kHYPC) && ((pg && *pg == t) || (pt && *pt == g))) {
          r.fired.Add(Criterion::kHYPC);
        }
        if (criteria.Has(Criterion::kWUP) &&
            WupSimilarity(taxonomy, g, t) >= criteria.wup_threshold) {
          r.fired.Add(Criterion::kWUP);
        }
      }
    }
  }
  r.verdict = !r.fired.empty();
  return r;
}

std::vector<double> AccuracyByCriteria(
    const std::vector<std::pair<std::string, std::string>>& pairs, const Taxonomy& taxonomy,
    const std::vector<CriteriaSet>& combos) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no (guess, truth) pairs");
  for (std::size_t i = 1; i < combos.size(); ++i) {
    if (!combos[i - 1].IsSubsetOf(combos[i])) {
      throw Error(ErrorCode::kInvalidArgument, "criteria combinations must form an inclusion chain");
    }
  }
  std::vector<double> out;
  out.reserve(combos.size());
  for (const auto& combo : combos) {
    std::size_t hits = 0;
    for (const auto& [g, t] : pairs) hits += Match(g, t, taxonomy, combo).verdict ? 1 : 0;
    out.push_back(static_cast<double>(hits) / static_cast<double>(pairs.size()));
  }
  return out;
}

}  // namespace sketchguess::lexnet
