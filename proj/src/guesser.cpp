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
#include <fstream>
#include <random>
#include <set>
#include <utility>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/guesser.hpp"

namespace sketchguess::guesser {

namespace {

Vec ToVec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void ShuffleInPlace(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
  }
}

std::vector<std::size_t> Iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void AppendRunLog(const std::optional<std::filesystem::path>& path, const std::string& line) {
  if (!path) return;
  std::ofstream out(*path, std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to run log " + path->string());
  out << line << '\n';
}

// Neighbours of `y`; a zero vector has no direction, so every word sits at
// distance 1 and the lexicographic tie-break applies.
std::vector<lexnet::Neighbor> Neighbours(const lexnet::EmbeddingTable& table, const Vec& y,
                                         std::size_t k, bool include_no_guess) {
  const std::size_t want = std::min(k + (include_no_guess ? 0 : 1), table.size());
  std::vector<lexnet::Neighbor> top;
  if (y.norm() > 0.0) {
    top = lexnet::Knn(table, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                      want);
  } else {
    std::vector<std::string> words = table.words();
    std::sort(words.begin(), words.end());
    for (std::size_t i = 0; i < want; ++i) top.push_back({words[i], 1.0});
  }
  if (!include_no_guess) {
    std::erase_if(top, [](const auto& n) { return n.word == lexnet::kNoGuessToken; });
  }
  if (top.size() > k) top.resize(k);
  return top;
}

}  // namespace

// ---------------------------------------------------------------------------

FeatureSource::FeatureSource(std::shared_ptr<const corpus::FeatureFile> file)
    : file_(std::move(file)) {
  if (!file_ || file_->dim() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature file is empty");
  }
}

int FeatureSource::dim() const {
  return file_ ? static_cast<int>(file_->dim()) : config_.feature_dim();
}

std::vector<Vec> FeatureSource::Sequence(const corpus::StrokeSequence& sketch) const {
  std::vector<Vec> out;
  if (file_) {
    const auto* rows = file_->Find(sketch.sketch_id);
    if (rows == nullptr) {
      throw Error(ErrorCode::kNotFound, "no precomputed features for sketch " + sketch.sketch_id);
    }
    if (rows->size() != sketch.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "feature block length differs from stroke count for " + sketch.sketch_id);
    }
    for (const auto& r : *rows) out.push_back(ToVec(r));
    return out;
  }
  for (const auto& f : corpus::ExtractSequenceFeatures(sketch, config_)) out.push_back(ToVec(f));
  return out;
}

Vec FeatureSource::Prefix(const corpus::StrokeSequence& prefix) const {
  if (file_) {
    throw Error(ErrorCode::kFailedPrecondition, "file-backed features cannot featurize new strokes");
  }
  return ToVec(corpus::ExtractFeatures(prefix, config_));
}

FeatureNormalizer FeatureNormalizer::Fit(const std::vector<std::vector<Vec>>& sequences) {
  Vec lo, hi;
  for (const auto& seq : sequences) {
    for (const Vec& x : seq) {
      if (lo.size() == 0) {
        lo = x;
        hi = x;
      } else {
        if (x.size() != lo.size()) {
          throw Error(ErrorCode::kInvalidArgument, "inconsistent feature dimensions");
        }
        lo = lo.cwiseMin(x);
        hi = hi.cwiseMax(x);
      }
    }
  }
  if (lo.size() == 0) throw Error(ErrorCode::kInvalidArgument, "no features to fit");
  FeatureNormalizer n{lo, Vec(lo.size())};
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    double range = hi[i] - lo[i];
    n.scale[i] = range > 0.0 ? 1.0 / range : 1.0;
  }
  return n;
}

FeatureNormalizer FeatureNormalizer::Identity(int dim) {
  return {Vec::Zero(dim), Vec::Ones(dim)};
}

Vec FeatureNormalizer::Apply(const Vec& raw) const {
  if (raw.size() != lo.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension mismatch: got " +
                                                 std::to_string(raw.size()) + ", expected " +
                                                 std::to_string(lo.size()));
  }
  return (raw - lo).cwiseProduct(scale);
}

std::vector<PreparedSequence> Prepare(const corpus::Corpus& corpus, const FeatureSource& source) {
  std::vector<PreparedSequence> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus.records) {
    out.push_back({r.sketch.sketch_id, r.sketch.category, source.Sequence(r.sketch),
                   r.guesses.guesses});
  }
  return out;
}

std::string FormatEpochLine(const EpochLog& e) {
  std::ostringstream out;
  out.precision(8);
  out << e.epoch << '\t' << e.train_loss << '\t' << e.val_acc1 << '\t' << e.val_acc3 << '\t'
      << e.val_acc5;
  return out.str();
}

// ---------------------------------------------------------------------------

GuesserModel::GuesserModel(corpus::FeatureConfig features, FeatureNormalizer normalizer,
                           std::shared_ptr<const lexnet::EmbeddingTable> table,
                           nn::LstmParams params, nn::LossConfig loss,
                           nn::OptimizerConfig optimizer)
    : features_(features),
      normalizer_(std::move(normalizer)),
      table_(std::move(table)),
      params_(std::move(params)),
      loss_(loss),
      optimizer_(optimizer) {
  if (!table_) throw Error(ErrorCode::kInvalidArgument, "guesser needs an embedding table");
  params_.Validate();
  if (params_.output_dim != static_cast<int>(table_->dim())) {
    throw Error(ErrorCode::kInvalidArgument, "output dimension must equal the embedding dimension");
  }
  if (normalizer_.lo.size() != params_.input_dim) {
    throw Error(ErrorCode::kInvalidArgument, "normalizer and LSTM input dimensions differ");
  }
}

GuesserSession GuesserModel::StartSession() const { return GuesserSession(*this); }

std::vector<StepOutput> GuesserModel::Infer(const std::vector<Vec>& raw_features,
                                            std::size_t k) const {
  GuesserSession session(*this);
  std::vector<StepOutput> out;
  out.reserve(raw_features.size());
  for (const Vec& x : raw_features) out.push_back(session.Step(x, k));
  return out;
}

GuesserSession::GuesserSession(const GuesserModel& model)
    : model_(&model), state_(nn::LstmState::Zero(model.params().hidden_dim)) {}

StepOutput GuesserSession::Step(const Vec& raw_feature, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  Vec x = model_->normalizer().Apply(raw_feature);
  StepOutput out;
  out.vector = nn::LstmStep(model_->params(), x, state_);
  out.top = Neighbours(model_->table(), out.vector, k, model_->include_no_guess);
  out.is_no_guess = !out.top.empty() && out.top.front().word == lexnet::kNoGuessToken;
  ++steps_;
  return out;
}

eval::StepPrediction ToPrediction(const StepOutput& out) {
  eval::StepPrediction p;
  for (const auto& n : out.top) p.ranked.push_back(n.word);
  return p;
}

std::vector<double> EvaluateUnified(const GuesserModel& model,
                                    const std::vector<PreparedSequence>& data,
                                    const eval::EvalConfig& cfg) {
  std::size_t kmax = 1;
  for (int k : cfg.k_values) kmax = std::max(kmax, static_cast<std::size_t>(k));
  std::vector<eval::SequencePrediction> preds;
  std::vector<std::vector<std::string>> truths;
  for (const auto& seq : data) {
    eval::SequencePrediction p;
    for (const auto& o : model.Infer(seq.features, kmax)) p.push_back(ToPrediction(o));
    preds.push_back(std::move(p));
    truths.push_back(seq.guesses);
  }
  return eval::SequenceAccuracy(preds, truths, cfg);
}

namespace {

struct NormalizedSet {
  std::vector<std::vector<Vec>> inputs;
};

NormalizedSet Normalize(const std::vector<PreparedSequence>& data, const FeatureNormalizer& n) {
  NormalizedSet out;
  for (const auto& s : data) {
    std::vector<Vec> xs;
    xs.reserve(s.features.size());
    for (const Vec& x : s.features) xs.push_back(n.Apply(x));
    out.inputs.push_back(std::move(xs));
  }
  return out;
}

std::vector<std::vector<Vec>> RawFeatures(const std::vector<PreparedSequence>& data) {
  std::vector<std::vector<Vec>> out;
  for (const auto& s : data) out.push_back(s.features);
  return out;
}

}  // namespace

GuesserModel TrainUnified(const std::vector<PreparedSequence>& train,
                          const std::vector<PreparedSequence>& val,
                          std::shared_ptr<const lexnet::EmbeddingTable> table,
                          const corpus::FeatureConfig& features, const TrainConfig& cfg) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training corpus");
  if (!table) throw Error(ErrorCode::kInvalidArgument, "missing embedding table");
  cfg.loss.Validate();
  cfg.optimizer.Validate();

  FeatureNormalizer normalizer = FeatureNormalizer::Fit(RawFeatures(train));
  const int input_dim = static_cast<int>(normalizer.lo.size());
  GuesserModel model(features, normalizer, table,
                     nn::LstmParams::Init(input_dim, cfg.hidden_dim,
                                          static_cast<int>(table->dim()), cfg.seed),
                     cfg.loss, cfg.optimizer);
  if (cfg.max_epochs <= 0) return model;

  const NormalizedSet xs = Normalize(train, normalizer);
  const std::size_t no_guess = *table->IndexOf(lexnet::kNoGuessToken);

  // Per-step target row in the table; nullopt marks an out-of-vocabulary guess.
  std::vector<std::vector<std::optional<std::size_t>>> targets;
  std::size_t oov = 0;
  std::set<std::string> categories;
  for (const auto& s : train) {
    categories.insert(s.category);
    std::vector<std::optional<std::size_t>> row;
    for (const auto& g : s.guesses) {
      if (g.empty()) {
        row.push_back(no_guess);
      } else if (auto i = table->IndexOf(g)) {
        row.push_back(*i);
      } else {
        row.push_back(std::nullopt);
        ++oov;
      }
    }
    targets.push_back(std::move(row));
  }
  std::vector<std::size_t> negatives_pool;
  if (cfg.loss.negatives == nn::NegativeSampling::kOtherCategory) {
    for (const auto& c : categories) {
      if (auto i = table->IndexOf(c)) negatives_pool.push_back(*i);
    }
  } else {
    negatives_pool = Iota(table->size());
  }

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  auto sample_negative = [&](std::size_t target) -> std::optional<Vec> {
    auto tu = table->UnitVector(target);
    for (int attempt = 0; attempt < 64; ++attempt) {
      std::size_t j = negatives_pool[static_cast<std::size_t>(rng() % negatives_pool.size())];
      if (j == target) continue;
      auto ju = table->UnitVector(j);
      double diff = 0.0;
      for (std::size_t d = 0; d < ju.size(); ++d) diff += std::abs(ju[d] - tu[d]);
      if (diff < 1e-12) continue;
      auto v = table->Vector(j);
      return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return std::nullopt;
  };

  const std::vector<PreparedSequence>& val_set = val.empty() ? train : val;
  eval::EvalConfig val_cfg;
  val_cfg.mode = cfg.val_mode;

  nn::AdagradState opt_state;
  nn::LstmParams best = model.params();
  double best_acc = -1.0;
  int wait = 0;
  std::vector<std::size_t> order = Iota(train.size());

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    ShuffleInPlace(order, rng);
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t s : order) {
      nn::LstmParams& params = model.mutable_params();
      nn::LstmTrace trace = nn::LstmForward(params, xs.inputs[s]);
      std::vector<Vec> dys(trace.steps.size(), Vec::Zero(params.output_dim));
      for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& target = targets[s][t];
        if (!target) continue;
        auto gv = table->Vector(*target);
        Vec g = Eigen::Map<const Vec>(gv.data(), static_cast<Eigen::Index>(gv.size()));
        std::optional<Vec> h;
        if (cfg.loss.NeedsNegative()) {
          h = sample_negative(*target);
          if (!h) continue;
        }
        const Vec& y = trace.steps[t].y;
        if (cfg.loss.kind != nn::LossKind::kMse && y.norm() == 0.0) continue;
        nn::LossValue lv = nn::ComputeLoss(cfg.loss, y, g, h ? &*h : nullptr);
        total += lv.loss;
        ++counted;
        dys[t] = std::move(lv.grad);
      }
      nn::LstmParams grads = nn::LstmBackward(params, trace, dys);
      nn::AdagradStep(opt_state, params.Tensors(), std::as_const(grads).Tensors(),
                      cfg.optimizer);
    }
    auto acc = EvaluateUnified(model, val_set, val_cfg);
    EpochLog e{epoch, counted ? total / static_cast<double>(counted) : 0.0, acc[0], acc[1],
               acc[2]};
    model.log.push_back(e);
    AppendRunLog(cfg.run_log, FormatEpochLine(e));
    if (e.val_acc1 > best_acc) {
      best_acc = e.val_acc1;
      best = model.params();
      wait = 0;
    } else if (++wait >= cfg.optimizer.early_stop_patience) {
      break;
    }
  }
  model.mutable_params() = std::move(best);
  model.oov_steps_skipped = oov;
  return model;
}

// ---------------------------------------------------------------------------

TransitionPrediction PredictTransition(const std::vector<double>& probs) {
  if (probs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty probability sequence");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= 0.5) return {static_cast<int>(i + 1), true};
  }
  return {static_cast<int>(probs.size()), false};
}

std::vector<nn::TensorView> TransitionPredictor::Tensors() {
  if (kind == Phase1Kind::kLstm) return lstm.Tensors();
  return {{"w", {dense_w.data(), static_cast<std::size_t>(dense_w.size())}},
          {"b", {dense_b.data(), static_cast<std::size_t>(dense_b.size())}}};
}

std::vector<nn::ConstTensorView> TransitionPredictor::Tensors() const {
  if (kind == Phase1Kind::kLstm) return lstm.Tensors();
  return {{"w", {dense_w.data(), static_cast<std::size_t>(dense_w.size())}},
          {"b", {dense_b.data(), static_cast<std::size_t>(dense_b.size())}}};
}

std::vector<double> TransitionPredictor::Probabilities(const std::vector<Vec>& raw) const {
  std::vector<double> out;
  out.reserve(raw.size());
  if (kind == Phase1Kind::kLstm) {
    nn::LstmState state = nn::LstmState::Zero(lstm.hidden_dim);
    for (const Vec& x : raw) out.push_back(nn::Sigmoid(nn::LstmStep(lstm, normalizer.Apply(x), state)[0]));
  } else {
    for (const Vec& x : raw) {
      out.push_back(nn::Sigmoid((dense_w * normalizer.Apply(x))(0) + dense_b[0]));
    }
  }
  return out;
}

std::vector<double> EvaluateLocalization(const TransitionPredictor& predictor,
                                         const std::vector<PreparedSequence>& data,
                                         const std::vector<int>& deltas) {
  std::vector<int> pred, truth;
  for (const auto& s : data) {
    auto g = eval::TransitionIndex(s.guesses);
    if (!g) continue;
    truth.push_back(*g);
    pred.push_back(PredictTransition(predictor.Probabilities(s.features)).index);
  }
  std::vector<double> out;
  for (int d : deltas) out.push_back(eval::LocalizationAccuracy(pred, truth, d));
  return out;
}

TransitionPredictor TrainTransitionPredictor(const std::vector<PreparedSequence>& train,
                                             const std::vector<PreparedSequence>& val,
                                             const Phase1Config& cfg, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training corpus");
  cfg.optimizer.Validate();
  TransitionPredictor pred;
  pred.kind = cfg.kind;
  pred.normalizer = FeatureNormalizer::Fit(RawFeatures(train));
  const int input_dim = static_cast<int>(pred.normalizer.lo.size());
  if (cfg.kind == Phase1Kind::kLstm) {
    pred.lstm = nn::LstmParams::Init(input_dim, cfg.hidden_dim, 1, seed);
  } else {
    pred.dense_w = nn::Mat::Zero(1, input_dim);
    pred.dense_b = nn::Vec::Zero(1);
  }

  std::vector<std::vector<int>> labels;
  std::size_t zeros = 0, ones = 0;
  for (const auto& s : train) {
    labels.push_back(eval::BinaryTargets(s.guesses));
    for (int l : labels.back()) (l == 0 ? zeros : ones)++;
  }
  pred.weights = (cfg.class_weighting && zeros > 0 && ones > 0)
                     ? nn::ClassWeights::FromCounts(zeros, ones)
                     : nn::ClassWeights{};
  if (cfg.max_epochs <= 0) return pred;

  const NormalizedSet xs = Normalize(train, pred.normalizer);
  const std::vector<PreparedSequence>& val_set = val.empty() ? train : val;
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  nn::AdagradState opt_state;
  TransitionPredictor best = pred;
  double best_acc = -1.0;
  int wait = 0;
  std::vector<std::size_t> order = Iota(train.size());

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    ShuffleInPlace(order, rng);
    double total = 0.0;
    for (std::size_t s : order) {
      const auto& x = xs.inputs[s];
      const auto& y = labels[s];
      const std::size_t n = x.size();
      const double inv_n = 1.0 / static_cast<double>(n);

      nn::LstmTrace trace;
      std::vector<double> probs(n);
      if (cfg.kind == Phase1Kind::kLstm) {
        trace = nn::LstmForward(pred.lstm, x);
        for (std::size_t t = 0; t < n; ++t) probs[t] = nn::Sigmoid(trace.steps[t].y[0]);
      } else {
        for (std::size_t t = 0; t < n; ++t) {
          probs[t] = nn::Sigmoid((pred.dense_w * x[t])(0) + pred.dense_b[0]);
        }
      }

      std::vector<double> d_logit(n, 0.0);
      if (cfg.loss == Phase1Loss::kRanking) {
        auto r = nn::RankingLoss(probs, y, cfg.lambda_s, cfg.lambda_r, pred.weights);
        total += r.total * inv_n;
        for (std::size_t t = 0; t < n; ++t) {
          d_logit[t] = r.grad_prob[t] * probs[t] * (1.0 - probs[t]) * inv_n;
        }
      } else {
        std::vector<double> tw(n, 0.0);
        if (cfg.loss == Phase1Loss::kWeightedSequence) {
          const int k = static_cast<int>(std::count(y.begin(), y.end(), 0));
          if (k < static_cast<int>(n)) tw = nn::TransitionWeights(k, static_cast<int>(n), cfg.alpha);
        }
        for (std::size_t t = 0; t < n; ++t) {
          nn::BceValue b = nn::WeightedBce(probs[t], y[t], pred.weights);
          total += (1.0 + tw[t]) * b.loss * inv_n;
          d_logit[t] = (1.0 + tw[t]) * b.grad_logit * inv_n;
        }
      }

      if (cfg.kind == Phase1Kind::kLstm) {
        std::vector<Vec> dys(n, Vec::Zero(1));
        for (std::size_t t = 0; t < n; ++t) dys[t][0] = d_logit[t];
        nn::LstmParams g = nn::LstmBackward(pred.lstm, trace, dys);
        nn::AdagradStep(opt_state, pred.lstm.Tensors(), std::as_const(g).Tensors(), cfg.optimizer);
      } else {
        nn::Mat gw = nn::Mat::Zero(1, input_dim);
        nn::Vec gb = nn::Vec::Zero(1);
        for (std::size_t t = 0; t < n; ++t) {
          gw += d_logit[t] * x[t].transpose();
          gb[0] += d_logit[t];
        }
        std::vector<nn::ConstTensorView> grads{
            {"w", {gw.data(), static_cast<std::size_t>(gw.size())}},
            {"b", {gb.data(), static_cast<std::size_t>(gb.size())}}};
        nn::AdagradStep(opt_state, pred.Tensors(), grads, cfg.optimizer);
      }
    }
    auto loc = EvaluateLocalization(pred, val_set, {0, 1, 2});
    EpochLog e{epoch, total / static_cast<double>(train.size()), loc[0], loc[1], loc[2]};
    pred.log.push_back(e);
    if (e.val_acc1 > best_acc) {
      best_acc = e.val_acc1;
      best = pred;
      wait = 0;
    } else if (++wait >= cfg.optimizer.early_stop_patience) {
      break;
    }
  }
  best.log = pred.log;
  return best;
}

// ---------------------------------------------------------------------------

TransitionPrediction TwoPhaseModel::PredictTransition(const std::vector<Vec>& raw) const {
  return guesser::PredictTransition(phase1_.Probabilities(raw));
}

eval::SequencePrediction TwoPhaseModel::PredictFrom(const std::vector<Vec>& raw, int start,
                                                    std::size_t k) const {
  if (start < 1 || start > static_cast<int>(raw.size())) {
    throw Error(ErrorCode::kInvalidArgument, "phase-2 start outside the sequence");
  }
  eval::SequencePrediction out;
  GuesserSession session = phase2_.StartSession();
  for (int t = 1; t <= static_cast<int>(raw.size()); ++t) {
    if (t < start) {
      out.push_back({{std::string(lexnet::kNoGuessToken)}});
    } else {
      out.push_back(ToPrediction(session.Step(raw[static_cast<std::size_t>(t - 1)], k)));
    }
  }
  return out;
}

eval::SequencePrediction TwoPhaseModel::PredictFull(const std::vector<Vec>& raw,
                                                    std::size_t k) const {
  return PredictFrom(raw, PredictTransition(raw).index, k);
}

std::vector<double> EvaluateLocalization(const TwoPhaseModel& model,
                                         const std::vector<PreparedSequence>& data,
                                         const std::vector<int>& deltas) {
  return EvaluateLocalization(model.phase1(), data, deltas);
}

namespace {

std::vector<PreparedSequence> GuessSuffixes(const std::vector<PreparedSequence>& data) {
  std::vector<PreparedSequence> out;
  for (const auto& s : data) {
    auto g = eval::TransitionIndex(s.guesses);
    if (!g) continue;
    const auto start = static_cast<std::ptrdiff_t>(*g - 1);
    PreparedSequence suffix{s.id, s.category,
                            std::vector<Vec>(s.features.begin() + start, s.features.end()),
                            std::vector<std::string>(s.guesses.begin() + start, s.guesses.end())};
    out.push_back(std::move(suffix));
  }
  return out;
}

}  // namespace

TwoPhaseModel TrainTwoPhase(const std::vector<PreparedSequence>& train,
                            const std::vector<PreparedSequence>& val,
                            std::shared_ptr<const lexnet::EmbeddingTable> table,
                            const corpus::FeatureConfig& features, const TwoPhaseConfig& cfg) {
  TransitionPredictor phase1 = TrainTransitionPredictor(train, val, cfg.phase1, cfg.phase2.seed);
  GuesserModel phase2 =
      TrainUnified(GuessSuffixes(train), GuessSuffixes(val), std::move(table), features, cfg.phase2);
  phase2.include_no_guess = false;
  return TwoPhaseModel(std::move(phase1), std::move(phase2));
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

using OJson = nlohmann::ordered_json;

OJson FeatureJson(const corpus::FeatureConfig& f) {
  return {{"grid_side", f.grid_side},
          {"dilation_radius", f.dilation_radius},
          {"direction_bins", f.direction_bins}};
}

corpus::FeatureConfig FeatureFromJson(const OJson& j) {
  corpus::FeatureConfig f;
  f.grid_side = j.at("grid_side").get<int>();
  f.dilation_radius = j.at("dilation_radius").get<int>();
  f.direction_bins = j.at("direction_bins").get<int>();
  return f;
}

std::string_view NegativesName(nn::NegativeSampling n) {
  return n == nn::NegativeSampling::kOtherCategory ? "other-category" : "whole-dictionary";
}

nn::NegativeSampling ParseNegatives(std::string_view s) {
  if (s == "other-category") return nn::NegativeSampling::kOtherCategory;
  if (s == "whole-dictionary") return nn::NegativeSampling::kWholeDictionary;
  throw Error(ErrorCode::kParse, "unknown negative sampling: " + std::string(s));
}

OJson LossJson(const nn::LossConfig& l) {
  return {{"kind", nn::LossKindName(l.kind)},
          {"margin", l.margin},
          {"lambda", l.lambda},
          {"negatives", NegativesName(l.negatives)}};
}

nn::LossConfig LossFromJson(const OJson& j) {
  nn::LossConfig l;
  auto kind = nn::ParseLossKind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kParse, "unknown loss kind");
  l.kind = *kind;
  l.margin = j.at("margin").get<double>();
  l.lambda = j.at("lambda").get<double>();
  l.negatives = ParseNegatives(j.at("negatives").get<std::string>());
  return l;
}

OJson OptimizerJson(const nn::OptimizerConfig& o) {
  return {{"learning_rate", o.learning_rate},
          {"momentum", o.momentum},
          {"grad_clip_norm", o.grad_clip_norm},
          {"weight_decay", o.weight_decay},
          {"early_stop_patience", o.early_stop_patience}};
}

nn::OptimizerConfig OptimizerFromJson(const OJson& j) {
  nn::OptimizerConfig o;
  o.learning_rate = j.at("learning_rate").get<double>();
  o.momentum = j.at("momentum").get<double>();
  o.grad_clip_norm = j.at("grad_clip_norm").get<double>();
  o.weight_decay = j.at("weight_decay").get<double>();
  o.early_stop_patience = j.at("early_stop_patience").get<int>();
  return o;
}

void AppendVector(nn::Checkpoint& ckpt, const std::string& name, const Vec& v) {
  ckpt.tensors.push_back({name, {static_cast<std::size_t>(v.size())},
                          std::vector<double>(v.data(), v.data() + v.size())});
}

Vec ReadVector(const nn::Checkpoint& ckpt, const std::string& name) {
  const nn::NamedTensor* t = ckpt.Find(name);
  if (t == nullptr) throw Error(ErrorCode::kNotFound, "checkpoint lacks tensor " + name);
  return Eigen::Map<const Vec>(t->data.data(), static_cast<Eigen::Index>(t->data.size()));
}

void AppendNormalizer(nn::Checkpoint& ckpt, const std::string& prefix,
                      const FeatureNormalizer& n) {
  AppendVector(ckpt, prefix + ".norm.lo", n.lo);
  AppendVector(ckpt, prefix + ".norm.scale", n.scale);
}

FeatureNormalizer ReadNormalizer(const nn::Checkpoint& ckpt, const std::string& prefix) {
  FeatureNormalizer n{ReadVector(ckpt, prefix + ".norm.lo"),
                      ReadVector(ckpt, prefix + ".norm.scale")};
  if (n.lo.size() != n.scale.size()) {
    throw Error(ErrorCode::kParse, "normalizer tensors differ in length");
  }
  return n;
}

std::string_view Phase1KindName(Phase1Kind k) {
  return k == Phase1Kind::kLstm ? "lstm" : "feed-forward";
}

Phase1Kind ParsePhase1Kind(std::string_view s) {
  if (s == "lstm") return Phase1Kind::kLstm;
  if (s == "feed-forward") return Phase1Kind::kFeedForward;
  throw Error(ErrorCode::kParse, "unknown phase-1 kind: " + std::string(s));
}

Phase1Loss ParsePhase1Loss(std::string_view s) {
  if (s == "sequence") return Phase1Loss::kSequence;
  if (s == "weighted") return Phase1Loss::kWeightedSequence;
  if (s == "ranking") return Phase1Loss::kRanking;
  throw Error(ErrorCode::kParse, "unknown phase-1 loss: " + std::string(s));
}

void CheckTable(const nn::Checkpoint& ckpt, const std::string& prefix,
                const lexnet::EmbeddingTable& table) {
  const auto& j = ckpt.config.at(prefix).at("embedding");
  if (j.at("dim").get<std::size_t>() != table.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding table dimension differs from checkpoint");
  }
}

}  // namespace

void GuesserModel::AppendTo(nn::Checkpoint& ckpt, const std::string& prefix) const {
  ckpt.config[prefix] = {{"feature", FeatureJson(features_)},
                         {"loss", LossJson(loss_)},
                         {"optimizer", OptimizerJson(optimizer_)},
                         {"include_no_guess", include_no_guess},
                         {"embedding", {{"dim", table_->dim()}, {"size", table_->size()}}}};
  AppendNormalizer(ckpt, prefix, normalizer_);
  nn::AppendLstm(ckpt, prefix + ".lstm", params_);
}

GuesserModel GuesserModel::ReadFrom(const nn::Checkpoint& ckpt, const std::string& prefix,
                                    std::shared_ptr<const lexnet::EmbeddingTable> table) {
  if (!table) throw Error(ErrorCode::kInvalidArgument, "missing embedding table");
  if (!ckpt.config.contains(prefix)) {
    throw Error(ErrorCode::kParse, "checkpoint lacks section " + prefix);
  }
  CheckTable(ckpt, prefix, *table);
  const auto& j = ckpt.config.at(prefix);
  GuesserModel m(FeatureFromJson(j.at("feature")), ReadNormalizer(ckpt, prefix), std::move(table),
                 nn::ReadLstm(ckpt, prefix + ".lstm"), LossFromJson(j.at("loss")),
                 OptimizerFromJson(j.at("optimizer")));
  m.include_no_guess = j.at("include_no_guess").get<bool>();
  return m;
}

nn::Checkpoint ToCheckpoint(const GuesserModel& model, std::uint64_t seed) {
  nn::Checkpoint ckpt;
  ckpt.seed = seed;
  ckpt.config["kind"] = "unified";
  model.AppendTo(ckpt, "guesser");
  return ckpt;
}

nn::Checkpoint ToCheckpoint(const TwoPhaseModel& model, std::uint64_t seed) {
  nn::Checkpoint ckpt;
  ckpt.seed = seed;
  ckpt.config["kind"] = "two-phase";
  const TransitionPredictor& p1 = model.phase1();
  ckpt.config["phase1"] = {{"kind", Phase1KindName(p1.kind)},
                           {"weights", {p1.weights.w0, p1.weights.w1}}};
  AppendNormalizer(ckpt, "phase1", p1.normalizer);
  if (p1.kind == Phase1Kind::kLstm) {
    nn::AppendLstm(ckpt, "phase1.lstm", p1.lstm);
  } else {
    ckpt.tensors.push_back({"phase1.dense.w",
                            {1, static_cast<std::size_t>(p1.dense_w.cols())},
                            std::vector<double>(p1.dense_w.data(),
                                                p1.dense_w.data() + p1.dense_w.size())});
    AppendVector(ckpt, "phase1.dense.b", p1.dense_b);
  }
  model.phase2().AppendTo(ckpt, "phase2");
  return ckpt;
}

std::string CheckpointKind(const nn::Checkpoint& ckpt) {
  if (!ckpt.config.contains("kind") || !ckpt.config["kind"].is_string()) {
    throw Error(ErrorCode::kParse, "checkpoint has no model kind");
  }
  std::string kind = ckpt.config["kind"].get<std::string>();
  if (kind != "unified" && kind != "two-phase") {
    throw Error(ErrorCode::kParse, "unknown checkpoint kind: " + kind);
  }
  return kind;
}

GuesserModel UnifiedFromCheckpoint(const nn::Checkpoint& ckpt,
                                   std::shared_ptr<const lexnet::EmbeddingTable> table) {
  if (CheckpointKind(ckpt) != "unified") {
    throw Error(ErrorCode::kFailedPrecondition, "checkpoint is not a unified model");
  }
  return GuesserModel::ReadFrom(ckpt, "guesser", std::move(table));
}

TwoPhaseModel TwoPhaseFromCheckpoint(const nn::Checkpoint& ckpt,
                                     std::shared_ptr<const lexnet::EmbeddingTable> table) {
  if (CheckpointKind(ckpt) != "two-phase") {
    throw Error(ErrorCode::kFailedPrecondition, "checkpoint is not a two-phase model");
  }
  const auto& j = ckpt.config.at("phase1");
  TransitionPredictor p1;
  p1.kind = ParsePhase1Kind(j.at("kind").get<std::string>());
  p1.weights = {j.at("weights").at(0).get<double>(), j.at("weights").at(1).get<double>()};
  p1.normalizer = ReadNormalizer(ckpt, "phase1");
  if (p1.kind == Phase1Kind::kLstm) {
    p1.lstm = nn::ReadLstm(ckpt, "phase1.lstm");
  } else {
    Vec w = ReadVector(ckpt, "phase1.dense.w");
    p1.dense_w = w.transpose();
    p1.dense_b = ReadVector(ckpt, "phase1.dense.b");
  }
  return TwoPhaseModel(std::move(p1), GuesserModel::ReadFrom(ckpt, "phase2", std::move(table)));
}

// ---------------------------------------------------------------------------
// Manifests.

TrainManifest TrainManifest::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str(), path.parent_path());
}

TrainManifest TrainManifest::Parse(std::string_view text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  auto path = [&](const char* key) -> std::filesystem::path {
    if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("manifest lacks ") + key);
    std::filesystem::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  auto opt_path = [&](const char* key) -> std::optional<std::filesystem::path> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return path(key);
  };

  TrainManifest m;
  try {
    m.model = j.value("model", m.model);
    if (m.model != "unified" && m.model != "two-phase") {
      throw Error(ErrorCode::kParse, "manifest model must be unified or two-phase");
    }
    m.train = path("train");
    m.val = path("val");
    m.lexicon_dir = path("lexicon_dir");
    m.embeddings = j.contains("embeddings") ? path("embeddings") : m.lexicon_dir / "embeddings.txt";
    m.features = opt_path("features");
    m.checkpoint = path("checkpoint");
    m.run_log = opt_path("run_log");
    if (j.contains("feature")) {
      const auto& f = j["feature"];
      m.feature.grid_side = f.value("grid_side", m.feature.grid_side);
      m.feature.dilation_radius = f.value("dilation_radius", m.feature.dilation_radius);
      m.feature.direction_bins = f.value("direction_bins", m.feature.direction_bins);
    }
    m.feature.Validate();
    m.hidden_sizes = j.value("hidden_sizes", m.hidden_sizes);
    if (m.hidden_sizes.empty()) throw Error(ErrorCode::kParse, "hidden_sizes is empty");
    for (int h : m.hidden_sizes) {
      if (h <= 0) throw Error(ErrorCode::kParse, "hidden sizes must be positive");
    }

    TrainConfig& t = m.config.phase2;
    t.seed = j.value("seed", t.seed);
    t.max_epochs = j.value("max_epochs", t.max_epochs);
    if (j.contains("loss")) {
      const auto& l = j["loss"];
      if (l.contains("kind")) {
        auto k = nn::ParseLossKind(l["kind"].get<std::string>());
        if (!k) throw Error(ErrorCode::kParse, "unknown loss kind");
        t.loss.kind = *k;
      }
      t.loss.margin = l.value("margin", t.loss.margin);
      t.loss.lambda = l.value("lambda", t.loss.lambda);
      if (l.contains("negatives")) t.loss.negatives = ParseNegatives(l["negatives"].get<std::string>());
    }
    auto read_opt = [](const nlohmann::json& o, nn::OptimizerConfig& c) {
      c.learning_rate = o.value("learning_rate", c.learning_rate);
      c.momentum = o.value("momentum", c.momentum);
      c.grad_clip_norm = o.value("grad_clip_norm", c.grad_clip_norm);
      c.weight_decay = o.value("weight_decay", c.weight_decay);
      c.early_stop_patience = o.value("early_stop_patience", c.early_stop_patience);
      c.Validate();
    };
    if (j.contains("optimizer")) read_opt(j["optimizer"], t.optimizer);
    if (j.contains("val_mode")) {
      auto mode = eval::ParseEvalMode(j["val_mode"].get<std::string>());
      if (!mode) throw Error(ErrorCode::kParse, "unknown val_mode");
      t.val_mode = *mode;
    }
    t.run_log = m.run_log;

    if (j.contains("phase1")) {
      const auto& p = j["phase1"];
      Phase1Config& c = m.config.phase1;
      if (p.contains("kind")) c.kind = ParsePhase1Kind(p["kind"].get<std::string>());
      c.hidden_dim = p.value("hidden_dim", c.hidden_dim);
      if (p.contains("loss")) c.loss = ParsePhase1Loss(p["loss"].get<std::string>());
      c.alpha = p.value("alpha", c.alpha);
      c.lambda_s = p.value("lambda_s", c.lambda_s);
      c.lambda_r = p.value("lambda_r", c.lambda_r);
      c.class_weighting = p.value("class_weighting", c.class_weighting);
      c.max_epochs = p.value("max_epochs", c.max_epochs);
      if (p.contains("optimizer")) read_opt(p["optimizer"], c.optimizer);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
  return m;
}

ManifestRun RunManifest(const TrainManifest& manifest) {
  auto train = corpus::ParseCorpus(manifest.train, true).corpus;
  auto val = corpus::ParseCorpus(manifest.val, true).corpus;
  auto table = std::make_shared<const lexnet::EmbeddingTable>(
      lexnet::EmbeddingTable::Load(manifest.embeddings));
  std::optional<FeatureSource> source;
  if (manifest.features) {
    source.emplace(std::make_shared<const corpus::FeatureFile>(
        corpus::FeatureFile::Load(*manifest.features)));
  } else {
    source.emplace(manifest.feature);
  }
  const auto train_set = Prepare(train, *source);
  const auto val_set = Prepare(val, *source);

  ManifestRun run;
  std::optional<nn::Checkpoint> best;
  double best_acc = -1.0;
  for (int hidden : manifest.hidden_sizes) {
    TwoPhaseConfig cfg = manifest.config;
    cfg.phase2.hidden_dim = hidden;
    double acc = 0.0;
    nn::Checkpoint ckpt;
    if (manifest.model == "unified") {
      GuesserModel m = TrainUnified(train_set, val_set, table, manifest.feature, cfg.phase2);
      eval::EvalConfig ec;
      ec.mode = cfg.phase2.val_mode;
      acc = EvaluateUnified(m, val_set.empty() ? train_set : val_set, ec)[0];
      ckpt = ToCheckpoint(m, cfg.phase2.seed);
    } else {
      TwoPhaseModel m = TrainTwoPhase(train_set, val_set, table, manifest.feature, cfg);
      std::vector<eval::SequencePrediction> preds;
      std::vector<std::vector<std::string>> truths;
      for (const auto& s : val_set.empty() ? train_set : val_set) {
        preds.push_back(m.PredictFull(s.features, 5));
        truths.push_back(s.guesses);
      }
      eval::EvalConfig ec;
      ec.mode = eval::EvalMode::kFull;
      acc = eval::SequenceAccuracy(preds, truths, ec)[0];
      ckpt = ToCheckpoint(m, cfg.phase2.seed);
    }
    run.val_acc1_by_hidden.emplace_back(hidden, acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = std::move(ckpt);
      run.best_hidden = hidden;
    }
  }
  nn::SaveCheckpoint(*best, manifest.checkpoint);
  return run;
}

}  // namespace sketchguess::guesser
