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

#ifndef SKETCHGUESS_NEURALCORE_HPP_
#define SKETCHGUESS_NEURALCORE_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace sketchguess::nn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A named view over one parameter tensor's contiguous storage.
struct TensorView {
  std::string name;
  std::span<double> data;
};

struct ConstTensorView {
  std::string name;
  std::span<const double> data;
};

// ---------------------------------------------------------------------------
// LSTM. Gate rows are stacked input, forget, cell, output.

struct LstmParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  Mat w_x;    // 4H x I
  Mat w_h;    // 4H x H
  Vec b;      // 4H
  Mat w_out;  // O x H
  Vec b_out;  // O

  static LstmParams Zeros(int input_dim, int hidden_dim, int output_dim);
  // Orthogonal gate blocks scaled by `gain`, forget bias 1, zero elsewhere.
  static LstmParams Init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed,
                         double gain = 1.1);

  std::vector<TensorView> Tensors();
  std::vector<ConstTensorView> Tensors() const;
  std::size_t ParameterCount() const;
  void Validate() const;
  bool AllFinite() const;
  bool operator==(const LstmParams& other) const;
};

struct LstmState {
  Vec h;
  Vec c;
  static LstmState Zero(int hidden_dim);
};

struct LstmStepCache {
  Vec x, h_prev, c_prev;
  Vec i, f, g, o, c, tanh_c, h;
  Vec y;
};

struct LstmTrace {
  std::vector<LstmStepCache> steps;
  std::vector<Vec> Outputs() const;
};

// One recurrence step; updates `state` and returns the projected output.
Vec LstmStep(const LstmParams& p, const Vec& x, LstmState& state,
             LstmStepCache* cache = nullptr);

LstmTrace LstmForward(const LstmParams& p, std::span<const Vec> inputs);

// Backpropagation through time for dL/dy_t given per step. Returns gradients
// with the same layout as the parameters.
LstmParams LstmBackward(const LstmParams& p, const LstmTrace& trace,
                        std::span<const Vec> d_outputs);

// ---------------------------------------------------------------------------
// Embedding regression losses.

enum class LossKind { kMse, kCosine, kHingeRank, kConvex };
enum class NegativeSampling { kOtherCategory, kWholeDictionary };

std::string_view LossKindName(LossKind kind);
std::optional<LossKind> ParseLossKind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::kConvex;
  double margin = 0.1;
  double lambda = 1.0;
  NegativeSampling negatives = NegativeSampling::kWholeDictionary;

  bool NeedsNegative() const { return kind == LossKind::kHingeRank || kind == LossKind::kConvex; }
  void Validate() const;
};

struct LossValue {
  double loss = 0.0;
  Vec grad;  // d loss / d predicted
};

// MSE ||p-g||^2, cosine 1-cos(p,g), hinge max(0, m - p^.g^ + p^.h^), and
// cosine + lambda * hinge. Gradients include the normalization terms.
LossValue ComputeLoss(const LossConfig& cfg, const Vec& predicted, const Vec& target,
                      const Vec* negative);

// ---------------------------------------------------------------------------
// Binary transition losses.

struct ClassWeights {
  double w0 = 1.0;
  double w1 = 1.0;

  // w_c = 0.5 / f_c with f_c the class fraction.
  static ClassWeights FromFractions(double f0, double f1);
  static ClassWeights FromCounts(std::size_t no_guess, std::size_t guess);
  double For(int label) const { return label == 0 ? w0 : w1; }
};

struct BceValue {
  double loss = 0.0;
  double grad_prob = 0.0;   // d loss / d prob
  double grad_logit = 0.0;  // d loss / d logit when prob = sigmoid(logit)
};

BceValue WeightedBce(double prob, int label, const ClassWeights& w);

double Sigmoid(double x);

// Weight for t = 1..N around the transition index k+1:
// exp(-alpha * (1 - (t/(k+1))^s)), s = 1 before and s = -1 after it.
std::vector<double> TransitionWeights(int k, int n, double alpha);

struct RankingLossResult {
  double total = 0.0;
  std::vector<double> classification;  // L_c per step
  std::vector<double> ranking;         // L_r per step
  std::vector<double> grad_prob;       // d total / d guess-probability
};

// `guess_prob[t]` is the probability of the guess class at step t; the
// detection score of a step is the probability of its own label. Labels must
// have the form 0...0 1...1.
RankingLossResult RankingLoss(std::span<const double> guess_prob, std::span<const int> labels,
                              double lambda_s, double lambda_r,
                              const ClassWeights& weights = {});

// ---------------------------------------------------------------------------
// Optimization.

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.0;
  double grad_clip_norm = 5.0;
  double weight_decay = 0.0005;
  int early_stop_patience = 10;

  void Validate() const;
};

inline constexpr double kAdagradEpsilon = 1e-8;

struct AdagradState {
  std::vector<std::vector<double>> accumulators;
  std::vector<std::vector<double>> velocity;
};

// Clip by global norm, add weight decay, accumulate squares, apply the
// adapted step, optionally blended with heavy-ball momentum.
void AdagradStep(AdagradState& state, const std::vector<TensorView>& params,
                 const std::vector<ConstTensorView>& grads, const OptimizerConfig& cfg);

double GlobalNorm(const std::vector<ConstTensorView>& grads);

// QR-derived matrix with orthonormal rows or columns, scaled by `gain`.
Mat OrthogonalInit(int rows, int cols, double gain, std::uint64_t seed);

// Portable standard normal draws (Box-Muller over mt19937_64).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed);
  double Next();

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

// ---------------------------------------------------------------------------
// Checkpoints: "PGM1\n" followed by one JSON object.

struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

struct Checkpoint {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<NamedTensor> tensors;

  const NamedTensor* Find(std::string_view name) const;
};

inline constexpr std::string_view kCheckpointMagic = "PGM1";

std::string SerializeCheckpoint(const Checkpoint& ckpt);
Checkpoint DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Appends/reads an LSTM's tensors under `prefix`.
void AppendLstm(Checkpoint& ckpt, const std::string& prefix, const LstmParams& p);
LstmParams ReadLstm(const Checkpoint& ckpt, const std::string& prefix);

}  // namespace sketchguess::nn

#endif  // SKETCHGUESS_NEURALCORE_HPP_
