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

#include <cmath>
#include <numbers>

#include "sketchguess/error.hpp"
#include "sketchguess/neuralcore.hpp"

namespace sketchguess::nn {

void OptimizerConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  if (!(grad_clip_norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "clip norm must be > 0");
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "weight decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "momentum must lie in [0, 1)");
  }
}

double GlobalNorm(const std::vector<ConstTensorView>& grads) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g.data) sq += v * v;
  }
  return std::sqrt(sq);
}

void AdagradStep(AdagradState& state, const std::vector<TensorView>& params,
                 const std::vector<ConstTensorView>& grads, const OptimizerConfig& cfg) {
  if (params.size() != grads.size()) {
    throw Error(ErrorCode::kInvalidArgument, "parameter and gradient lists differ");
  }
  if (state.accumulators.empty()) {
    for (const auto& p : params) {
      state.accumulators.emplace_back(p.data.size(), 0.0);
      state.velocity.emplace_back(p.data.size(), 0.0);
    }
  }
  if (state.accumulators.size() != params.size()) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer state does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].data.size() != grads[i].data.size() ||
        params[i].data.size() != state.accumulators[i].size()) {
      throw Error(ErrorCode::kInvalidArgument, "shape mismatch in tensor " + params[i].name);
    }
  }
  const double norm = GlobalNorm(grads);
  if (!std::isfinite(norm)) throw Error(ErrorCode::kInvalidArgument, "non-finite gradient");
  const double scale = norm > cfg.grad_clip_norm ? cfg.grad_clip_norm / norm : 1.0;

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].data;
    auto grad = grads[i].data;
    auto& acc = state.accumulators[i];
    auto& vel = state.velocity[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double g = scale * grad[j] + cfg.weight_decay * theta[j];
      acc[j] += g * g;
      double delta = -cfg.learning_rate * g / (std::sqrt(acc[j]) + kAdagradEpsilon);
      if (cfg.momentum > 0.0) delta += cfg.momentum * vel[j];
      vel[j] = delta;
      theta[j] += delta;
    }
  }
}

NormalSource::NormalSource(std::uint64_t seed) : rng_(seed) {}

double NormalSource::Next() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  auto uniform = [this] {
    return (static_cast<double>(rng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  };
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

Mat OrthogonalInit(int rows, int cols, double gain, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::kInvalidArgument, "matrix dims must be >= 1");
  const int tall = std::max(rows, cols);
  const int wide = std::min(rows, cols);
  NormalSource normal(seed);
  Mat a(tall, wide);
  for (int j = 0; j < wide; ++j) {
    for (int i = 0; i < tall; ++i) a(i, j) = normal.Next();
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(tall, wide);
  const Mat& r = qr.matrixQR();
  for (int j = 0; j < wide; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  q *= gain;
  if (rows >= cols) return q;
  return q.transpose();
}

}  // namespace sketchguess::nn
