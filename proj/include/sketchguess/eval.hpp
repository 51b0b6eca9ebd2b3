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

#ifndef SKETCHGUESS_EVAL_HPP_
#define SKETCHGUESS_EVAL_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sketchguess/lexnet.hpp"
#include "sketchguess/stats.hpp"

namespace sketchguess::eval {

enum class EvalMode { kGuessPortion, kFull };

std::string_view EvalModeName(EvalMode mode);
std::optional<EvalMode> ParseEvalMode(std::string_view name);

struct EvalConfig {
  std::vector<int> k_values{1, 3, 5};
  std::vector<int> deltas{0, 1, 2};
  EvalMode mode = EvalMode::kGuessPortion;
  bool step_weighted = false;  // diagnostic: mean over steps instead of sequences

  void Validate() const;
};

// Window width 2*delta+1 <-> delta.
int DeltaFromWindowWidth(int width);
inline int WindowWidth(int delta) { return 2 * delta + 1; }

// Model output at one step: candidate words, nearest first. A step where the
// model abstains is represented by {"#"}.
struct StepPrediction {
  std::vector<std::string> ranked;
};
using SequencePrediction = std::vector<StepPrediction>;

bool InTopK(const StepPrediction& step, std::string_view word, int k);

// True iff `truth_word` is among the k nearest neighbours of `pred`. Words
// absent from the table never match.
bool CorrectMatch(std::span<const double> pred, std::string_view truth_word, int k,
                  const lexnet::EmbeddingTable& table);

// Per-sequence fraction of correct steps, averaged over sequences, one value
// per entry of cfg.k_values. Sequences with no scored step are skipped.
std::vector<double> SequenceAccuracy(const std::vector<SequencePrediction>& predictions,
                                     const std::vector<std::vector<std::string>>& truths,
                                     const EvalConfig& cfg);

// Score of one sequence at one k.
std::optional<double> SequenceScore(const SequencePrediction& prediction,
                                    const std::vector<std::string>& truth, int k, EvalMode mode);

// Fraction with |pred - truth| <= delta.
double LocalizationAccuracy(std::span<const int> predicted, std::span<const int> truth,
                            int delta);

// 1-based index of the first guess (k+1), or nullopt when there is none.
std::optional<int> TransitionIndex(const std::vector<std::string>& guesses);

// 0^k 1^(N-k) labels of a preprocessed guess sequence.
std::vector<int> BinaryTargets(const std::vector<std::string>& guesses);

struct SequenceRatings {
  std::string sequence_id;
  std::vector<int> human;  // ratings of the human-produced guesses
  std::vector<int> model;  // ratings of the model-produced guesses
};

struct TuringReport {
  std::vector<int> human_modes;
  std::vector<int> model_modes;
  std::map<int, std::size_t> human_histogram;  // rating -> count over all judges
  std::map<int, std::size_t> model_histogram;
  stats::WilcoxonResult wilcoxon;
};

TuringReport BuildTuringReport(const std::vector<SequenceRatings>& records);

struct MetricRow {
  std::string metric;
  std::string mode;
  int k_or_delta = 0;
  double value = 0.0;
};

// metric<TAB>mode<TAB>k_or_delta<TAB>value
// Throws kUndefined unless `values` (ordered by increasing k or delta) never
// decreases; every reported metric series passes through here.
void CheckNonDecreasing(const std::vector<double>& values, std::string_view what);

std::string FormatMachine(const std::vector<MetricRow>& rows);
// Columns per k (or window width) in the layout of the accuracy tables.
std::string FormatTable(const std::vector<MetricRow>& rows);

}  // namespace sketchguess::eval

#endif  // SKETCHGUESS_EVAL_HPP_
