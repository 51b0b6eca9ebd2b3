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

#ifndef SKETCHGUESS_CORPUS_HPP_
#define SKETCHGUESS_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace sketchguess::corpus {

// Canvas coordinates are normalized to [0,1]^2 with y growing downward.
struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

struct Stroke {
  std::vector<Point> points;
  bool operator==(const Stroke&) const = default;
};

struct StrokeSequence {
  std::string sketch_id;
  std::string category;
  std::vector<Stroke> strokes;

  std::size_t size() const { return strokes.size(); }
  // Cumulative prefix S_t holding the first t strokes.
  StrokeSequence Prefix(std::size_t t) const;
  bool operator==(const StrokeSequence&) const = default;
};

// guesses[t] is the guess-word after stroke t+1; "" means no guess.
struct GuessSequence {
  std::string sketch_id;
  std::string subject_id;
  std::vector<std::string> guesses;

  std::size_t size() const { return guesses.size(); }
  bool operator==(const GuessSequence&) const = default;
};

struct Record {
  StrokeSequence sketch;
  GuessSequence guesses;
  bool operator==(const Record&) const = default;
};

struct Corpus {
  std::vector<Record> records;

  std::set<std::string> Categories() const;
  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct ParseResult {
  Corpus corpus;
  std::size_t skipped = 0;  // malformed lines dropped in lenient mode
};

// One record per line, each a JSON object with id/category/subject/strokes/
// guesses. Validates stroke coordinates and the strokes/guesses pairing.
ParseResult ParseCorpus(const std::filesystem::path& path, bool strict);
ParseResult ParseCorpusText(std::string_view text, bool strict);
Record ParseRecordLine(std::string_view line);

// One stroke as a JSON array of [x,y] pairs; same validation as records.
Stroke ParseStrokeJson(std::string_view text);
std::string FormatRecordLine(const Record& record);
std::string FormatCorpus(const Corpus& corpus);
void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Text-side lexicon used by preprocessing and augmentation.

enum class PosTag { kNoun, kOther };

using PosDictionary = std::unordered_map<std::string, PosTag>;

class SpellDictionary {
 public:
  SpellDictionary() = default;
  explicit SpellDictionary(std::set<std::string> words);

  void Add(std::string word) { words_.insert(std::move(word)); }
  bool Contains(const std::string& word) const { return words_.count(word) > 0; }
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

struct TextLexicon {
  SpellDictionary spelling;
  PosDictionary pos;
  std::map<std::string, std::string> plurals;
  // word -> synonyms (excluding the word), in file order.
  std::map<std::string, std::vector<std::string>> synonyms;

  // Reads words.txt, pos.tsv, plurals.tsv and synsets.tsv from `dir`.
  // POS words and `categories` are merged into the spelling dictionary.
  static TextLexicon Load(const std::filesystem::path& dir,
                          const std::set<std::string>& categories = {});
};

PosDictionary ParsePosDictionary(std::string_view text);
std::map<std::string, std::string> ParsePluralMap(std::string_view text);

// ---------------------------------------------------------------------------
// Preprocessing.

std::vector<std::string> Tokenize(std::string_view phrase);
std::string ToLower(std::string_view text);

std::size_t Levenshtein(std::string_view a, std::string_view b);

// Nearest dictionary word by edit distance (ties lexicographic); the word is
// returned unchanged when it is already present or the best distance > 2.
std::string SpellCorrect(const std::string& word, const SpellDictionary& dictionary);

// Keeps the noun tokens of `phrase` in order. A token also counts as a noun
// when its spelling correction is one. Phrases without nouns are returned
// unchanged.
std::string ExtractNouns(std::string_view phrase, const PosDictionary& pos,
                         const SpellDictionary* spelling = nullptr);

struct Removed {};
using PreprocessOutcome = std::variant<GuessSequence, Removed>;

// lowercase -> noun extraction -> spelling -> forward propagation.
PreprocessOutcome PreprocessGuessSequence(const GuessSequence& sequence,
                                          const TextLexicon& lexicon);

struct PreprocessStats {
  std::size_t input = 0;
  std::size_t removed = 0;
};

Corpus PreprocessCorpus(const Corpus& raw, const TextLexicon& lexicon,
                        PreprocessStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Augmentation.

std::vector<GuessSequence> AugmentGuesses(const GuessSequence& sequence,
                                          const TextLexicon& lexicon);

struct StrokeScheme {
  bool flip_vertical = false;
  double scale_x = 0.0;  // relative change of the side, e.g. 0.07
  double scale_y = 0.0;
};

StrokeSequence AugmentStrokes(const StrokeSequence& sketch, const StrokeScheme& scheme);

// Identity, vertical flip, and the four axis-uniform scales.
std::vector<StrokeScheme> StandardStrokeSchemes();

// ---------------------------------------------------------------------------
// Splitting.

struct SplitRatios {
  double train = 0.60;
  double val = 0.25;
  double test = 0.15;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

SplitIndices SplitIndicesFor(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

struct CorpusSplit {
  Corpus train;
  Corpus val;
  Corpus test;
};

CorpusSplit SplitCorpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Features.

struct FeatureConfig {
  int grid_side = 8;
  int dilation_radius = 1;
  int direction_bins = 4;

  int feature_dim() const { return grid_side * grid_side + direction_bins; }
  void Validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

// Occupancy raster (dilated) followed by a length-weighted histogram of
// undirected segment orientations. All entries lie in [0,1].
std::vector<double> ExtractFeatures(const StrokeSequence& prefix, const FeatureConfig& cfg);

// One feature vector per cumulative prefix S_1..S_N.
std::vector<std::vector<double>> ExtractSequenceFeatures(const StrokeSequence& sketch,
                                                         const FeatureConfig& cfg);

// Precomputed per-step features, keyed by sketch id.
class FeatureFile {
 public:
  static FeatureFile Load(const std::filesystem::path& path);
  static FeatureFile Parse(std::string_view text);

  const std::vector<std::vector<double>>* Find(const std::string& sketch_id) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return blocks_.size(); }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<std::vector<double>>> blocks_;
};

}  // namespace sketchguess::corpus

#endif  // SKETCHGUESS_CORPUS_HPP_
