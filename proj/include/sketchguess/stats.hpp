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

#ifndef SKETCHGUESS_STATS_HPP_
#define SKETCHGUESS_STATS_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sketchguess/corpus.hpp"

namespace sketchguess::stats {

struct CategoryAccuracy {
  std::string category;
  std::vector<int> samples;  // 0/1 outcomes
  double mean = 0.0;
  double variance = 0.0;  // population variance

  static CategoryAccuracy FromSamples(std::string category, std::vector<int> samples);
};

// (mean_m - mean_h) / sqrt((V_m + V_h) / 2). nullopt when both variances are
// zero, where the effect size is undefined.
std::optional<double> CohensD(const CategoryAccuracy& machine, const CategoryAccuracy& human);

enum class EffectBand { kNegligible, kSmall, kMedium, kLarge };
EffectBand BandFor(double d);
std::string_view BandName(EffectBand band);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval WilsonInterval(long successes, long n, double z = 1.96);

struct WilcoxonResult {
  std::size_t n_effective = 0;  // pairs with non-zero difference
  double w_plus = 0.0;
  double w_minus = 0.0;
  double w = 0.0;  // min(W+, W-)
  double z = 0.0;  // (W+ - mean) / sd with tie-corrected variance
  double p_normal = 1.0;  // continuity-corrected
  std::optional<double> p_exact;  // set when n_effective <= kExactLimit
  double p = 1.0;                 // exact when available, otherwise normal
};

inline constexpr std::size_t kWilcoxonExactLimit = 12;

// Two-sided signed-rank test on x_i - y_i.
WilcoxonResult WilcoxonSignedRank(std::span<const std::pair<double, double>> pairs);

// Ratings are integers in [-2, 2]. Ties prefer the value closest to zero,
// then the smaller value.
int LikertMode(std::span<const int> ratings);

// Counts of sequences with 1, 2, 3 and >= 4 distinct non-empty guesses.
std::array<std::size_t, 4> GuessCountHistogram(const corpus::Corpus& corpus);
std::size_t UniqueGuessCount(const corpus::GuessSequence& sequence);

struct FirstGuessStats {
  std::string category;
  std::vector<double> locations;
  double median = 0.0;
  double mad = 0.0;  // median absolute deviation
};

double Median(std::vector<double> values);

// (index of first guess, 1-based) / N for one sequence; nullopt if no guess.
std::optional<double> FirstGuessLocation(const corpus::GuessSequence& sequence);

// Per-category stats sorted by ascending median (ties by name).
std::vector<FirstGuessStats> FirstGuessByCategory(const corpus::Corpus& corpus);

// metric<TAB>key<TAB>value
std::string MachineLine(std::string_view metric, std::string_view key, double value);

}  // namespace sketchguess::stats

#endif  // SKETCHGUESS_STATS_HPP_
