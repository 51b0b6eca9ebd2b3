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

#ifndef SKETCHGUESS_LEXNET_HPP_
#define SKETCHGUESS_LEXNET_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sketchguess::lexnet {

inline constexpr std::string_view kNoGuessToken = "#";
inline constexpr std::uint64_t kDefaultNoGuessSeed = 1;

// Word -> vector table. Always holds the reserved "#" entry.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  // `entries` must not contain duplicates. When "#" is missing it is
  // synthesized as a unit vector drawn from `no_guess_seed`.
  EmbeddingTable(std::size_t dim, std::vector<std::pair<std::string, std::vector<double>>> entries,
                 std::uint64_t no_guess_seed = kDefaultNoGuessSeed);

  // Header "<vocab_size> <dim> [seed]" then "word v1 ... v_dim" rows.
  static EmbeddingTable Load(const std::filesystem::path& path);
  static EmbeddingTable Parse(std::string_view text);
  std::string Format() const;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  std::uint64_t no_guess_seed() const { return seed_; }

  bool Contains(std::string_view word) const;
  std::optional<std::size_t> IndexOf(std::string_view word) const;
  const std::string& Word(std::size_t i) const { return words_[i]; }
  std::span<const double> Vector(std::size_t i) const;
  std::span<const double> Vector(std::string_view word) const;  // throws kNotFound
  std::span<const double> NoGuessVector() const { return Vector(kNoGuessToken); }
  const std::vector<std::string>& words() const { return words_; }

  // Unit-norm copy of row i.
  std::span<const double> UnitVector(std::size_t i) const;

 private:
  std::size_t dim_ = 0;
  std::uint64_t seed_ = kDefaultNoGuessSeed;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::vector<double> unit_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<double> SeededUnitVector(std::size_t dim, std::uint64_t seed);

struct Neighbor {
  std::string word;
  double distance = 0.0;  // 1 - cos
  bool operator==(const Neighbor&) const = default;
};

// The k entries with the smallest cosine distance; ties go to the
// lexicographically smaller word.
std::vector<Neighbor> Knn(const EmbeddingTable& table, std::span<const double> query,
                          std::size_t k);

// ---------------------------------------------------------------------------

// Hypernym forest plus synonym sets. Nodes without a parent hang off `root`.
class Taxonomy {
 public:
  static constexpr std::string_view kDefaultRoot = "entity";

  Taxonomy() = default;
  explicit Taxonomy(std::string root) : root_(std::move(root)) { AddNode(root_); }

  // "child<TAB>parent" lines and one tab-separated synset per line.
  static Taxonomy Parse(std::string_view edges, std::string_view synsets,
                        std::string root = std::string(kDefaultRoot));
  static Taxonomy Load(const std::filesystem::path& dir,
                       std::string root = std::string(kDefaultRoot));

  // Adds child -> parent; rejects cycles and second parents.
  void AddEdge(const std::string& child, const std::string& parent);
  void AddSynset(const std::vector<std::string>& words);

  bool Contains(std::string_view word) const;
  const std::string& root() const { return root_; }
  // Parent of `word`; nullopt for the root. Throws kNotFound if absent.
  std::optional<std::string> Parent(std::string_view word) const;
  int Depth(std::string_view word) const;  // root has depth 1
  std::string LowestCommonAncestor(std::string_view a, std::string_view b) const;
  bool AreSynonyms(std::string_view a, std::string_view b) const;
  std::vector<std::string> Nodes() const;

 private:
  std::size_t AddNode(const std::string& word);
  std::size_t Require(std::string_view word) const;

  std::string root_ = std::string(kDefaultRoot);
  std::vector<std::string> names_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<int> depth_cache_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::size_t>> synsets_of_;
  std::size_t synset_count_ = 0;
};

// 2*depth(lcs) / (depth(a) + depth(b)).
double WupSimilarity(const Taxonomy& taxonomy, std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------

enum class Criterion : std::uint8_t { kEM = 0, kSUB, kSYN, kHY, kHYPC, kWUP };

inline constexpr Criterion kAllCriteria[] = {Criterion::kEM,  Criterion::kSUB,
                                             Criterion::kSYN, Criterion::kHY,
                                             Criterion::kHYPC, Criterion::kWUP};

std::string_view CriterionName(Criterion c);
std::optional<Criterion> ParseCriterion(std::string_view name);

struct CriteriaSet {
  std::uint8_t bits = 0;
  double wup_threshold = 0.9;

  CriteriaSet() = default;
  CriteriaSet(std::initializer_list<Criterion> list, double threshold = 0.9);

  // "EM|SUB|SYN" style.
  static CriteriaSet Parse(std::string_view spec, double threshold = 0.9);
  // EM | SUB | SYN, the combination judges agreed with most.
  static CriteriaSet Default();

  bool Has(Criterion c) const { return (bits >> static_cast<int>(c)) & 1U; }
  void Add(Criterion c) { bits |= static_cast<std::uint8_t>(1U << static_cast<int>(c)); }
  bool empty() const { return bits == 0; }
  bool IsSubsetOf(const CriteriaSet& other) const { return (bits & ~other.bits) == 0; }
  std::string ToString() const;
  bool operator==(const CriteriaSet&) const = default;
};

struct MatchResult {
  bool verdict = false;
  CriteriaSet fired;
};

// Token-multiset containment in either direction (tokens split on
// whitespace and hyphens).
bool SubsetMatch(std::string_view guess, std::string_view truth);

MatchResult Match(std::string_view guess, std::string_view truth, const Taxonomy& taxonomy,
                  const CriteriaSet& criteria);

// Fraction matched per criteria set. `combos` must form an inclusion chain.
std::vector<double> AccuracyByCriteria(
    const std::vector<std::pair<std::string, std::string>>& pairs, const Taxonomy& taxonomy,
    const std::vector<CriteriaSet>& combos);

}  // namespace sketchguess::lexnet

#endif  // SKETCHGUESS_LEXNET_HPP_
