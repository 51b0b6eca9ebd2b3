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

#include "sketchguess/error.hpp"
#include "sketchguess/neuralcore.hpp"

namespace sketchguess::nn {

std::string_view LossKindName(LossKind kind) {
  switch (kind) {
    case LossKind::kMse: return "mse";
    case LossKind::kCosine: return "cosine";
    case LossKind::kHingeRank: return "hinge-rank";
    case LossKind::kConvex: return "convex";
  }
  return "?";
}

std::optional<LossKind> ParseLossKind(std::string_view name) {
  for (LossKind k : {LossKind::kMse, LossKind::kCosine, LossKind::kHingeRank, LossKind::kConvex}) {
    if (LossKindName(k) == name) return k;
  }
  return std::nullopt;
}

void LossConfig::Validate() const {
  if (!(margin > 0.0)) throw Error(ErrorCode::kInvalidArgument, "margin must be positive");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be non-negative");
}

namespace {

double RequireNorm(const Vec& v, const char* what) {
  double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " has zero or non-finite norm");
  }
  return n;
}

LossValue Cosine(const Vec& p, const Vec& g) {
  const double np = RequireNorm(p, "prediction");
  const double ng = RequireNorm(g, "target");
  const double cos = p.dot(g) / (np * ng);
  LossValue out;
  out.loss = 1.0 - cos;
  out.grad = -(g / (np * ng) - cos * p / (np * np));
  return out;
}

LossValue Hinge(const Vec& p, const Vec& g, const Vec* h, double margin) {
  if (h == nullptr) throw Error(ErrorCode::kInvalidArgument, "hinge-rank loss needs a negative");
  const double np = RequireNorm(p, "prediction");
  const Vec ph = p / np;
  const Vec gh = g / RequireNorm(g, "target");
  const Vec hh = *h / RequireNorm(*h, "negative");
  if ((hh - gh).norm() < 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "negative must differ from the target");
  }
  LossValue out;
  const double s = margin - ph.dot(gh) + ph.dot(hh);
  if (s > 0.0) {
    out.loss = s;
    const Vec d = hh - gh;  // d s / d p-hat
    out.grad = (d - ph * ph.dot(d)) / np;
  } else {
    out.grad = Vec::Zero(p.size());
  }
  return out;
}

}  // namespace

LossValue ComputeLoss(const LossConfig& cfg, const Vec& predicted, const Vec& target,
                      const Vec* negative) {
  if (predicted.size() != target.size() ||
      (negative != nullptr && negative->size() != target.size())) {
    throw Error(ErrorCode::kInvalidArgument, "loss operands differ in dimension");
  }
  switch (cfg.kind) {
    case LossKind::kMse: {
      Vec diff = predicted - target;
      return {diff.squaredNorm(), 2.0 * diff};
    }
    case LossKind::kCosine:
      return Cosine(predicted, target);
    case LossKind::kHingeRank:
      return Hinge(predicted, target, negative, cfg.margin);
    case LossKind::kConvex: {
      LossValue c = Cosine(predicted, target);
      LossValue h = Hinge(predicted, target, negative, cfg.margin);
      return {c.loss + cfg.lambda * h.loss, c.grad + cfg.lambda * h.grad};
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown loss kind");
}

ClassWeights ClassWeights::FromFractions(double f0, double f1) {
  if (!(f0 > 0.0) || !(f1 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "class fractions must be positive");
  }
  constexpr double kMeanFraction = 0.5;
  return {kMeanFraction / f0, kMeanFraction / f1};
}

ClassWeights ClassWeights::FromCounts(std::size_t no_guess, std::size_t guess) {
  const double total = static_cast<double>(no_guess + guess);
  return FromFractions(static_cast<double>(no_guess) / total, static_cast<double>(guess) / total);
}

BceValue WeightedBce(double prob, int label, const ClassWeights& w) {
  if (!std::isfinite(prob) || prob < 0.0 || prob > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "probability outside [0,1]");
  }
  if (label != 0 && label != 1) throw Error(ErrorCode::kInvalidArgument, "label must be 0 or 1");
  constexpr double kClamp = 1e-12;
  const double p = std::clamp(prob, kClamp, 1.0 - kClamp);
  const double wt = w.For(label);
  BceValue out;
  if (label == 1) {
    out.loss = -wt * std::log(p);
    out.grad_prob = -wt / p;
  } else {
    out.loss = -wt * std::log(1.0 - p);
    out.grad_prob = wt / (1.0 - p);
  }
  out.grad_logit = wt * (prob - label);
  return out;
}

std::vector<double> TransitionWeights(int k, int n, double alpha) {
  if (n < 1 || k < 0 || k + 1 > n) {
    throw Error(ErrorCode::kInvalidArgument, "transition index k+1 must lie in [1, N]");
  }
  if (!(alpha > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
  std::vector<double> w(static_cast<std::size_t>(n));
  const double peak = static_cast<double>(k + 1);
  for (int t = 1; t <= n; ++t) {
    double ratio;
    if (t < k + 1) {
      ratio = t / peak;
    } else if (t == k + 1) {
      ratio = 1.0;
    } else {
      ratio = peak / t;
    }
    w[static_cast<std::size_t>(t - 1)] = t == k + 1 ? 1.0 : std::exp(-alpha * (1.0 - ratio));
  }
  return w;
}

RankingLossResult RankingLoss(std::span<const double> guess_prob, std::span<const int> labels,
                              double lambda_s, double lambda_r, const ClassWeights& weights) {
  if (guess_prob.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and labels differ in length");
  }
  const std::size_t n = labels.size();
  std::size_t phase_start = 0;  // t_p for the guess phase
  for (std::size_t t = 0; t < n; ++t) {
    if (labels[t] != 0 && labels[t] != 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0/1");
    }
    if (t > 0 && labels[t - 1] == 1 && labels[t] == 0) {
      throw Error(ErrorCode::kInvalidArgument, "labels must have the form 0...0 1...1");
    }
    if (t > 0 && labels[t - 1] == 0 && labels[t] == 1) phase_start = t;
  }

  RankingLossResult r;
  r.classification.assign(n, 0.0);
  r.ranking.assign(n, 0.0);
  r.grad_prob.assign(n, 0.0);
  auto detection = [&](std::size_t t, int label) {
    return label == 1 ? guess_prob[t] : 1.0 - guess_prob[t];
  };
  auto d_detection = [](int label) { return label == 1 ? 1.0 : -1.0; };

  for (std::size_t t = 0; t < n; ++t) {
    BceValue c = WeightedBce(guess_prob[t], labels[t], weights);
    r.classification[t] = c.loss;
    r.grad_prob[t] += lambda_s * c.grad_prob;
    if (t == 0) continue;
    if (labels[t] != labels[t - 1]) {
      // Score of the previous phase at the transition should vanish.
      r.ranking[t] = detection(t, labels[t - 1]);
      r.grad_prob[t] += lambda_r * d_detection(labels[t - 1]);
      continue;
    }
    const std::size_t start = labels[t] == 0 ? 0 : phase_start;
    std::size_t arg = start;
    double best = detection(start, labels[t]);
    for (std::size_t u = start + 1; u < t; ++u) {
      double d = detection(u, labels[t]);
      if (d > best) {
        best = d;
        arg = u;
      }
    }
    const double gap = best - detection(t, labels[t]);
    if (gap > 0.0) {
      r.ranking[t] = gap;
      r.grad_prob[arg] += lambda_r * d_detection(labels[t]);
      r.grad_prob[t] -= lambda_r * d_detection(labels[t]);
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    r.total += lambda_s * r.classification[t] + lambda_r * r.ranking[t];
  }
  return r;
}

}  // namespace sketchguess::nn
