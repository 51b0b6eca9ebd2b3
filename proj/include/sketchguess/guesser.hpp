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

#ifndef SKETCHGUESS_GUESSER_HPP_
#define SKETCHGUESS_GUESSER_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sketchguess/corpus.hpp"
#include "sketchguess/eval.hpp"
#include "sketchguess/lexnet.hpp"
#include "sketchguess/neuralcore.hpp"

namespace sketchguess::guesser {

using nn::Vec;

// Where per-step sketch features come from: the built-in raster extractor
// or a file of precomputed vectors.
class FeatureSource {
 public:
  explicit FeatureSource(corpus::FeatureConfig cfg) : config_(cfg) { cfg.Validate(); }
  explicit FeatureSource(std::shared_ptr<const corpus::FeatureFile> file);

  int dim() const;
  bool from_file() const { return file_ != nullptr; }
  const corpus::FeatureConfig& config() const { return config_; }
  std::vector<Vec> Sequence(const corpus::StrokeSequence& sketch) const;
  Vec Prefix(const corpus::StrokeSequence& prefix) const;  // extractor only

 private:
  corpus::FeatureConfig config_;
  std::shared_ptr<const corpus::FeatureFile> file_;
};

// Per-dimension min-max scaling fitted on the training split.
struct FeatureNormalizer {
  Vec lo;
  Vec scale;  // 1 / (max - min), or 1 for constant dimensions

  static FeatureNormalizer Fit(const std::vector<std::vector<Vec>>& sequences);
  static FeatureNormalizer Identity(int dim);
  Vec Apply(const Vec& raw) const;
};

struct PreparedSequence {
  std::string id;
  std::string category;
  std::vector<Vec> features;  // raw, one per cumulative prefix
  std::vector<std::string> guesses;
};

std::vector<PreparedSequence> Prepare(const corpus::Corpus& corpus, const FeatureSource& source);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc1 = 0.0;
  double val_acc3 = 0.0;
  double val_acc5 = 0.0;
};

// epoch<TAB>train_loss<TAB>val_acc@1<TAB>val_acc@3<TAB>val_acc@5
std::string FormatEpochLine(const EpochLog& e);

struct TrainConfig {
  int hidden_dim = 128;
  int max_epochs = 100;
  std::uint64_t seed = 1;
  nn::LossConfig loss;
  nn::OptimizerConfig optimizer;
  eval::EvalMode val_mode = eval::EvalMode::kGuessPortion;
  std::optional<std::filesystem::path> run_log;  // appended, one line per epoch
};

struct StepOutput {
  Vec vector;
  std::vector<lexnet::Neighbor> top;
  bool is_no_guess = false;  // "#" is the nearest neighbour
};

class GuesserSession;

// LSTM regressing word embeddings; "#" stands for "no guess".
class GuesserModel {
 public:
  GuesserModel(corpus::FeatureConfig features, FeatureNormalizer normalizer,
               std::shared_ptr<const lexnet::EmbeddingTable> table, nn::LstmParams params,
               nn::LossConfig loss, nn::OptimizerConfig optimizer);

  const nn::LstmParams& params() const { return params_; }
  nn::LstmParams& mutable_params() { return params_; }
  const lexnet::EmbeddingTable& table() const { return *table_; }
  std::shared_ptr<const lexnet::EmbeddingTable> table_ptr() const { return table_; }
  const FeatureNormalizer& normalizer() const { return normalizer_; }
  const corpus::FeatureConfig& feature_config() const { return features_; }
  const nn::LossConfig& loss() const { return loss_; }
  const nn::OptimizerConfig& optimizer() const { return optimizer_; }

  // Excluding "#" from retrieval turns every step into a word guess.
  bool include_no_guess = true;
  std::vector<EpochLog> log;
  std::size_t oov_steps_skipped = 0;

  GuesserSession StartSession() const;
  std::vector<StepOutput> Infer(const std::vector<Vec>& raw_features, std::size_t k) const;

  void AppendTo(nn::Checkpoint& ckpt, const std::string& prefix) const;
  static GuesserModel ReadFrom(const nn::Checkpoint& ckpt, const std::string& prefix,
                               std::shared_ptr<const lexnet::EmbeddingTable> table);

 private:
  corpus::FeatureConfig features_;
  FeatureNormalizer normalizer_;
  std::shared_ptr<const lexnet::EmbeddingTable> table_;
  nn::LstmParams params_;
  nn::LossConfig loss_;
  nn::OptimizerConfig optimizer_;
};

// Private recurrent state over one immutable model.
class GuesserSession {
 public:
  explicit GuesserSession(const GuesserModel& model);
  StepOutput Step(const Vec& raw_feature, std::size_t k);
  std::size_t steps() const { return steps_; }

 private:
  const GuesserModel* model_;
  nn::LstmState state_;
  std::size_t steps_ = 0;
};

eval::StepPrediction ToPrediction(const StepOutput& out);

GuesserModel TrainUnified(const std::vector<PreparedSequence>& train,
                          const std::vector<PreparedSequence>& val,
                          std::shared_ptr<const lexnet::EmbeddingTable> table,
                          const corpus::FeatureConfig& features, const TrainConfig& cfg);

// Accuracy@{1,3,5} of a unified model over prepared sequences.
std::vector<double> EvaluateUnified(const GuesserModel& model,
                                    const std::vector<PreparedSequence>& data,
                                    const eval::EvalConfig& cfg);

// ---------------------------------------------------------------------------
// Two-phase baseline.

enum class Phase1Kind { kLstm, kFeedForward };
enum class Phase1Loss { kSequence, kWeightedSequence, kRanking };

struct Phase1Config {
  Phase1Kind kind = Phase1Kind::kLstm;
  int hidden_dim = 128;
  Phase1Loss loss = Phase1Loss::kWeightedSequence;
  double alpha = 7.0;
  double lambda_s = 1.0;
  double lambda_r = 0.5;
  bool class_weighting = true;
  int max_epochs = 100;
  nn::OptimizerConfig optimizer{5e-5, 0.9, 5.0, 0.0005, 10};
};

struct TwoPhaseConfig {
  Phase1Config phase1;
  TrainConfig phase2;
};

struct TransitionPrediction {
  int index = 0;       // 1-based
  bool found = false;  // false: no step reached 0.5, index is N
};

// First step with probability >= 0.5, else the last step with found=false.
TransitionPrediction PredictTransition(const std::vector<double>& guess_probabilities);

class TransitionPredictor {
 public:
  Phase1Kind kind = Phase1Kind::kLstm;
  FeatureNormalizer normalizer;
  nn::LstmParams lstm;     // output dim 1, logit
  nn::Mat dense_w;         // 1 x I for the feed-forward scorer
  nn::Vec dense_b;         // 1
  nn::ClassWeights weights;
  std::vector<EpochLog> log;

  std::vector<nn::TensorView> Tensors();
  std::vector<nn::ConstTensorView> Tensors() const;
  std::vector<double> Probabilities(const std::vector<Vec>& raw_features) const;
};

TransitionPredictor TrainTransitionPredictor(const std::vector<PreparedSequence>& train,
                                             const std::vector<PreparedSequence>& val,
                                             const Phase1Config& cfg, std::uint64_t seed);

class TwoPhaseModel {
 public:
  TwoPhaseModel(TransitionPredictor phase1, GuesserModel phase2)
      : phase1_(std::move(phase1)), phase2_(std::move(phase2)) {}

  const TransitionPredictor& phase1() const { return phase1_; }
  const GuesserModel& phase2() const { return phase2_; }

  TransitionPrediction PredictTransition(const std::vector<Vec>& raw_features) const;

  // Steps before the predicted transition abstain ("#"); from there on the
  // phase-2 guesser runs with fresh state.
  eval::SequencePrediction PredictFull(const std::vector<Vec>& raw_features,
                                       std::size_t k) const;
  // Phase 2 started at a known transition index (1-based).
  eval::SequencePrediction PredictFrom(const std::vector<Vec>& raw_features, int start,
                                       std::size_t k) const;

 private:
  TransitionPredictor phase1_;
  GuesserModel phase2_;
};

TwoPhaseModel TrainTwoPhase(const std::vector<PreparedSequence>& train,
                            const std::vector<PreparedSequence>& val,
                            std::shared_ptr<const lexnet::EmbeddingTable> table,
                            const corpus::FeatureConfig& features, const TwoPhaseConfig& cfg);

// Localization accuracy per delta on prepared sequences with a guess.
std::vector<double> EvaluateLocalization(const TwoPhaseModel& model,
                                         const std::vector<PreparedSequence>& data,
                                         const std::vector<int>& deltas);
std::vector<double> EvaluateLocalization(const TransitionPredictor& predictor,
                                         const std::vector<PreparedSequence>& data,
                                         const std::vector<int>& deltas);

// ---------------------------------------------------------------------------
// Checkpoints and manifests.

nn::Checkpoint ToCheckpoint(const GuesserModel& model, std::uint64_t seed);
nn::Checkpoint ToCheckpoint(const TwoPhaseModel& model, std::uint64_t seed);

// "unified" or "two-phase".
std::string CheckpointKind(const nn::Checkpoint& ckpt);
GuesserModel UnifiedFromCheckpoint(const nn::Checkpoint& ckpt,
                                   std::shared_ptr<const lexnet::EmbeddingTable> table);
TwoPhaseModel TwoPhaseFromCheckpoint(const nn::Checkpoint& ckpt,
                                     std::shared_ptr<const lexnet::EmbeddingTable> table);

struct TrainManifest {
  std::string model = "unified";
  std::filesystem::path train;
  std::filesystem::path val;
  std::filesystem::path lexicon_dir;
  std::filesystem::path embeddings;  // defaults to lexicon_dir/embeddings.txt
  std::optional<std::filesystem::path> features;
  std::filesystem::path checkpoint;
  std::optional<std::filesystem::path> run_log;
  corpus::FeatureConfig feature;
  std::vector<int> hidden_sizes{128};
  TwoPhaseConfig config;  // config.phase2 holds the unified/phase-2 settings

  // JSON manifest; relative paths resolve against the manifest's directory.
  static TrainManifest Load(const std::filesystem::path& path);
  static TrainManifest Parse(std::string_view text, const std::filesystem::path& base_dir);
};

struct ManifestRun {
  int best_hidden = 0;
  std::vector<std::pair<int, double>> val_acc1_by_hidden;
};

// Trains every hidden size of the grid, keeps the best by validation
// accuracy@1 and writes its checkpoint.
ManifestRun RunManifest(const TrainManifest& manifest);

}  // namespace sketchguess::guesser

#endif  // SKETCHGUESS_GUESSER_HPP_
