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
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/stats.hpp"

namespace sketchguess::stats {

CategoryAccuracy CategoryAccuracy::FromSamples(std::string category, std::vector<int> samples) {
  CategoryAccuracy out{std::move(category), std::move(samples), 0.0, 0.0};
  if (out.samples.empty()) return out;
  double n = static_cast<double>(out.samples.size());
  for (int s : out.samples) {
    if (s != 0 && s != 1) throw Error(ErrorCode::kInvalidArgument, "samples must be 0/1");
    out.mean += s;
  }
  out.mean /= n;
  for (int s : out.samples) out.variance += (s - out.mean) * (s - out.mean);
  out.variance /= n;
  return out;
}

std::optional<double> CohensD(const CategoryAccuracy& machine, const CategoryAccuracy& human) {
  double s = std::sqrt((machine.variance + human.variance) / 2.0);
  if (!(s > 0.0)) return std::nullopt;
  return (machine.mean - human.mean) / s;
}

EffectBand BandFor(double d) {
  double a = std::abs(d);
  if (a < 0.2) return EffectBand::kNegligible;
  if (a < 0.5) return EffectBand::kSmall;
  if (a < 0.8) return EffectBand::kMedium;
  return EffectBand::kLarge;
}

std::string_view BandName(EffectBand band) {
  switch (band) {
    case EffectBand::kNegligible: return "negligible";
    case EffectBand::kSmall: return "small";
    case EffectBand::kMedium: return "medium";
    case EffectBand::kLarge: return "large";
  }
  return "?";
}

Interval WilsonInterval(long successes, long n, double z) {
  if (n <= 0) throw Error(ErrorCode::kInvalidArgument, "Wilson interval needs n >= 1");
  if (successes < 0 || successes > n) {
    throw Error(ErrorCode::kInvalidArgument, "successes must lie in [0, n]");
  }
  if (!(z > 0.0)) throw Error(ErrorCode::kInvalidArgument, "z must be positive");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  Interval out{std::clamp(center - half, 0.0, 1.0), std::clamp(center + half, 0.0, 1.0)};
  // Rounding can push a bound a hair past p-hat at the boundaries.
  out.lo = std::min(out.lo, p);
  out.hi = std::max(out.hi, p);
  return out;
}

namespace {

double NormalSf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult WilcoxonSignedRank(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "Wilcoxon needs at least one pair");
  std::vector<double> diffs;
  for (const auto& [x, y] : pairs) {
    double d = x - y;
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult r;
  r.n_effective = diffs.size();
  if (diffs.empty()) {
    r.p_exact = 1.0;
    return r;
  }
  const std::size_t n = diffs.size();

  // Average ranks of |d|, kept doubled so every rank is an integer.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
  std::vector<std::int64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    // positions i..j (0-based) share rank ((i+1)+(j+1))/2
    std::int64_t r2 = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  std::int64_t plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) plus2 += rank2[i];
  }
  r.w_plus = static_cast<double>(plus2) / 2.0;
  r.w_minus = static_cast<double>(total2 - plus2) / 2.0;
  r.w = std::min(r.w_plus, r.w_minus);

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (var > 0.0) {
    r.z = (r.w_plus - mean) / std::sqrt(var);
    // Continuity-corrected tail; Z itself is reported uncorrected.
    const double gap = std::max(0.0, std::abs(r.w_plus - mean) - 0.5);
    r.p_normal = std::min(1.0, 2.0 * NormalSf(gap / std::sqrt(var)));
  }

  if (n <= kWilcoxonExactLimit) {
    // |2*W+ - T| in doubled-rank units, compared exactly.
    const std::int64_t observed = std::abs(2 * plus2 - total2);
    std::uint64_t extreme = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      std::int64_t s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::uint64_t{1} << i)) s += rank2[i];
      }
      if (std::abs(2 * s - total2) >= observed) ++extreme;
    }
    r.p_exact = static_cast<double>(extreme) / static_cast<double>(count);
    r.p = *r.p_exact;
  } else {
    r.p = r.p_normal;
  }
  return r;
}

int LikertMode(std::span<const int> ratings) {
  if (ratings.empty()) throw Error(ErrorCode::kInvalidArgument, "no ratings");
  std::array<int, 5> counts{};
  for (int r : ratings) {
    if (r < -2 || r > 2) throw Error(ErrorCode::kInvalidArgument, "rating outside [-2, 2]");
    ++counts[static_cast<std::size_t>(r + 2)];
  }
  // Candidates in tie-break order: 0, -1, 1, -2, 2.
  constexpr int kOrder[] = {0, -1, 1, -2, 2};
  int best = kOrder[0];
  for (int v : kOrder) {
    if (counts[static_cast<std::size_t>(v + 2)] > counts[static_cast<std::size_t>(best + 2)]) {
      best = v;
    }
  }
  return best;
}

std::size_t UniqueGuessCount(const corpus::GuessSequence& sequence) {
  std::set<std::string> unique;
  for (const auto& g : sequence.guesses) {
    if (!g.empty()) unique.insert(g);
  }
  return unique.size();
}

std::array<std::size_t, 4> GuessCountHistogram(const corpus::Corpus& corpus) {
  std::array<std::size_t, 4> buckets{};
  for (const auto& r : corpus.records) {
    std::size_t u = UniqueGuessCount(r.guesses);
    if (u == 0) continue;
    ++buckets[std::min<std::size_t>(u, 4) - 1];
  }
  return buckets;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "median of empty set");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

std::optional<double> FirstGuessLocation(const corpus::GuessSequence& sequence) {
  for (std::size_t i = 0; i < sequence.guesses.size(); ++i) {
    if (!sequence.guesses[i].empty()) {
      return static_cast<double>(i + 1) / static_cast<double>(sequence.guesses.size());
    }
  }
  return std::nullopt;
}

std::vector<FirstGuessStats> FirstGuessByCategory(const corpus::Corpus& corpus) {
  std::map<std::string, std::vector<double>> by_cat;
  for (const auto& r : corpus.records) {
    if (auto loc = FirstGuessLocation(r.guesses)) by_cat[r.sketch.category].push_back(*loc);
  }
  std::vector<FirstGuessStats> out;
  for (auto& [cat, locs] : by_cat) {
    FirstGuessStats s{cat, locs, Median(locs), 0.0};
    std::vector<double> dev;
    dev.reserve(locs.size());
    for (double l : locs) dev.push_back(std::abs(l - s.median));
    s.mad = Median(std::move(dev));
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.median < b.median;
  });
  return out;
}

std::string MachineLine(std::string_view metric, std::string_view key, double value) {
  std::ostringstream out;
  out.precision(10);
  out << metric << '\t' << key << '\t' << value;
  return out.str();
}

}  // namespace sketchguess::stats
