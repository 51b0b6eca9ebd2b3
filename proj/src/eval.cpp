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
#include <cstdlib>
#include <iomanip>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/eval.hpp"

namespace sketchguess::eval {

std::string_view EvalModeName(EvalMode mode) {
  return mode == EvalMode::kGuessPortion ? "guess-portion" : "full";
}

std::optional<EvalMode> ParseEvalMode(std::string_view name) {
  if (name == "guess-portion") return EvalMode::kGuessPortion;
  if (name == "full") return EvalMode::kFull;
  return std::nullopt;
}

void EvalConfig::Validate() const {
  for (int k : k_values) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }
  for (int d : deltas) {
    if (d < 0) throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
  }
}

int DeltaFromWindowWidth(int width) {
  if (width < 1 || width % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "window width must be a positive odd number");
  }
  return (width - 1) / 2;
}

bool InTopK(const StepPrediction& step, std::string_view word, int k) {
  const std::size_t n = std::min(step.ranked.size(), static_cast<std::size_t>(std::max(k, 0)));
  for (std::size_t i = 0; i < n; ++i) {
    if (step.ranked[i] == word) return true;
  }
  return false;
}

bool CorrectMatch(std::span<const double> pred, std::string_view truth_word, int k,
                  const lexnet::EmbeddingTable& table) {
  if (!table.Contains(truth_word)) return false;
  const std::size_t kk = std::min(static_cast<std::size_t>(k), table.size());
  for (const auto& n : lexnet::Knn(table, pred, kk)) {
    if (n.word == truth_word) return true;
  }
  return false;
}

std::optional<double> SequenceScore(const SequencePrediction& prediction,
                                    const std::vector<std::string>& truth, int k, EvalMode mode) {
  if (prediction.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction and truth lengths differ");
  }
  std::size_t scored = 0, correct = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t].empty()) {
      if (mode == EvalMode::kGuessPortion) continue;
      ++scored;
      correct += InTopK(prediction[t], lexnet::kNoGuessToken, k) ? 1 : 0;
    } else {
      ++scored;
      correct += InTopK(prediction[t], truth[t], k) ? 1 : 0;
    }
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(scored);
}

std::vector<double> SequenceAccuracy(const std::vector<SequencePrediction>& predictions,
                                     const std::vector<std::vector<std::string>>& truths,
                                     const EvalConfig& cfg) {
  cfg.Validate();
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction and truth counts differ");
  }
  std::vector<double> out;
  for (int k : cfg.k_values) {
    double sum = 0.0;
    std::size_t count = 0;
    if (!cfg.step_weighted) {
      for (std::size_t i = 0; i < truths.size(); ++i) {
        if (auto s = SequenceScore(predictions[i], truths[i], k, cfg.mode)) {
          sum += *s;
          ++count;
        }
      }
    } else {
      for (std::size_t i = 0; i < truths.size(); ++i) {
        if (predictions[i].size() != truths[i].size()) {
          throw Error(ErrorCode::kInvalidArgument, "prediction and truth lengths differ");
        }
        for (std::size_t t = 0; t < truths[i].size(); ++t) {
          const std::string& truth = truths[i][t];
          if (truth.empty() && cfg.mode == EvalMode::kGuessPortion) continue;
          std::string_view target = truth.empty() ? lexnet::kNoGuessToken : truth;
          sum += InTopK(predictions[i][t], target, k) ? 1.0 : 0.0;
          ++count;
        }
      }
    }
    out.push_back(count == 0 ? 0.0 : sum / static_cast<double>(count));
  }
  return out;
}

double LocalizationAccuracy(std::span<const int> predicted, std::span<const int> truth,
                            int delta) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction and truth counts differ");
  }
  if (delta < 0) throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::abs(predicted[i] - truth[i]) <= delta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::optional<int> TransitionIndex(const std::vector<std::string>& guesses) {
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    if (!guesses[i].empty()) return static_cast<int>(i + 1);
  }
  return std::nullopt;
}

std::vector<int> BinaryTargets(const std::vector<std::string>& guesses) {
  std::vector<int> out(guesses.size(), 0);
  bool on = false;
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    on = on || !guesses[i].empty();
    out[i] = on ? 1 : 0;
  }
  return out;
}

TuringReport BuildTuringReport(const std::vector<SequenceRatings>& records) {
  TuringReport r;
  std::vector<std::pair<double, double>> pairs;
  for (const auto& rec : records) {
    if (rec.human.empty() || rec.model.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sequence " + rec.sequence_id + " lacks ratings for one guesser type");
    }
    int mh = stats::LikertMode(rec.human);
    int mm = stats::LikertMode(rec.model);
    r.human_modes.push_back(mh);
    r.model_modes.push_back(mm);
    pairs.emplace_back(mh, mm);
    for (int v : rec.human) ++r.human_histogram[v];
    for (int v : rec.model) ++r.model_histogram[v];
  }
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no rated sequences");
  r.wilcoxon = stats::WilcoxonSignedRank(pairs);
  return r;
}

void CheckNonDecreasing(const std::vector<double>& values, std::string_view what) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1]) {
      throw Error(ErrorCode::kUndefined, std::string(what) + " decreases between entries " +
                                             std::to_string(i - 1) + " and " + std::to_string(i));
    }
  }
}

std::string FormatMachine(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out.precision(10);
  for (const auto& r : rows) {
    out << r.metric << '\t' << r.mode << '\t' << r.k_or_delta << '\t' << r.value << '\n';
  }
  return out.str();
}

std::string FormatTable(const std::vector<MetricRow>& rows) {
  // Group by (metric, mode); columns are the distinct k/delta values.
  std::map<std::pair<std::string, std::string>, std::map<int, double>> grid;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    auto key = std::make_pair(r.metric, r.mode);
    if (!grid.count(key)) order.push_back(key);
    grid[key][r.k_or_delta] = r.value;
  }
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  for (const auto& key : order) {
    const bool localization = key.first.rfind("localization", 0) == 0;
    out << key.first << " (" << key.second << ")\n  " << (localization ? "window" : "k     ");
    for (const auto& [col, v] : grid[key]) {
      out << std::setw(9) << (localization ? WindowWidth(col) : col);
    }
    out << "\n  acc % ";
    for (const auto& [col, v] : grid[key]) out << std::setw(9) << 100.0 * v;
    out << "\n";
  }
  return out.str();
}

}  // namespace sketchguess::eval
