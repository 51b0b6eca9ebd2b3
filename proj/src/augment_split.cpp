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
#include <numeric>
#include <random>

#include "sketchguess/corpus.hpp"
#include "sketchguess/error.hpp"

namespace sketchguess::corpus {

StrokeSequence AugmentStrokes(const StrokeSequence& sketch, const StrokeScheme& scheme) {
  StrokeSequence out = sketch;
  const double sx = 1.0 + scheme.scale_x;
  const double sy = 1.0 + scheme.scale_y;
  for (Stroke& s : out.strokes) {
    for (Point& p : s.points) {
      double y = scheme.flip_vertical ? 1.0 - p.y : p.y;
      double x = 0.5 + sx * (p.x - 0.5);
      y = 0.5 + sy * (y - 0.5);
      p.x = std::clamp(x, 0.0, 1.0);
      p.y = std::clamp(y, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<StrokeScheme> StandardStrokeSchemes() {
  std::vector<StrokeScheme> schemes{{false, 0.0, 0.0}, {true, 0.0, 0.0}};
  for (double s : {-0.07, -0.03, 0.03, 0.07}) schemes.push_back({false, s, s});
  return schemes;
}

SplitIndices SplitIndicesFor(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kFailedPrecondition, "cannot split an empty corpus");
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be non-negative and sum to 1");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Fisher-Yates with an explicit modulo draw; std::shuffle is not portable
  // across standard libraries.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  auto floor_count = [n](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  std::size_t n_val = floor_count(ratios.val);
  std::size_t n_test = floor_count(ratios.test);
  std::size_t n_train = n - n_val - n_test;

  SplitIndices out;
  out.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  return out;
}

CorpusSplit SplitCorpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  SplitIndices idx = SplitIndicesFor(corpus.size(), ratios, seed);
  CorpusSplit out;
  for (auto i : idx.train) out.train.records.push_back(corpus.records[i]);
  for (auto i : idx.val) out.val.records.push_back(corpus.records[i]);
  for (auto i : idx.test) out.test.records.push_back(corpus.records[i]);
  return out;
}

}  // namespace sketchguess::corpus
