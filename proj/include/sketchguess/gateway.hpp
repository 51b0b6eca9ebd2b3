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

#ifndef SKETCHGUESS_GATEWAY_HPP_
#define SKETCHGUESS_GATEWAY_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "sketchguess/corpus.hpp"
#include "sketchguess/guesser.hpp"
#include "sketchguess/lexnet.hpp"

namespace sketchguess::gateway {

// Produces the model's ranked words for the last step of a feature prefix.
class ModelGuesser {
 public:
  explicit ModelGuesser(guesser::GuesserModel model);
  explicit ModelGuesser(guesser::TwoPhaseModel model);
  static ModelGuesser FromCheckpoint(const nn::Checkpoint& ckpt,
                                     std::shared_ptr<const lexnet::EmbeddingTable> table);

  const corpus::FeatureConfig& feature_config() const;
  int input_dim() const;
  std::vector<std::string> Guess(const std::vector<nn::Vec>& prefix_features,
                                 std::size_t k) const;

 private:
  std::variant<guesser::GuesserModel, guesser::TwoPhaseModel> model_;
};

// Immutable snapshots shared by every session.
struct Resources {
  std::shared_ptr<const corpus::Corpus> corpus;
  std::shared_ptr<const corpus::TextLexicon> lexicon;
  std::shared_ptr<const lexnet::Taxonomy> taxonomy;
  std::shared_ptr<const ModelGuesser> model;  // optional
  corpus::FeatureConfig features;
  std::size_t top_k = 5;
  std::uint64_t seed = 1;
};

enum class Phase { kActive, kRevealed };
std::string_view PhaseName(Phase p);

enum class GuesserType { kHuman, kModel };
std::string_view GuesserTypeName(GuesserType t);
GuesserType ParseGuesserType(std::string_view name);

// Selector for create: exactly one of sketch_id / category, or neither for a
// random pick. `free_draw` starts an empty sketch fed by the client.
struct CreateRequest {
  std::optional<std::string> sketch_id;
  std::optional<std::string> category;
  bool free_draw = false;
  std::string subject = "anonymous";
};

struct SessionState {
  std::string session_id;
  bool free_draw = false;
  std::string subject;
  corpus::StrokeSequence sketch;  // replay: full sketch; free draw: strokes so far
  std::size_t cursor = 0;
  std::vector<std::string> human_guesses;  // raw text per answered step
  std::vector<std::vector<std::string>> model_guesses;
  Phase phase = Phase::kActive;
  std::map<std::pair<std::string, GuesserType>, int> ratings;  // (judge, type) -> canonical

  std::size_t total_strokes() const { return sketch.size(); }
};

// Ratings on a reversed scale are mirrored; 0 is a fixed point.
int CanonicalRating(int rating, bool scale_reversed);

struct RatingAck {
  int stored = 0;
  std::optional<int> replaced;  // previous value for the same (judge, type)
};

struct StepVerdicts {
  std::vector<bool> human;
  std::vector<bool> model;
  bool human_final = false;
  bool model_final = false;
};

struct ExportBundle {
  std::string corpus;   // corpus line format
  std::string ratings;  // session<TAB>judge<TAB>type<TAB>value
  std::size_t sessions = 0;
};

struct ExportFilter {
  std::optional<std::string> category;
};

class SessionStore {
 public:
  // With a log path the store appends every mutation and replays the
  // existing log first.
  explicit SessionStore(Resources resources,
                        std::optional<std::filesystem::path> log_path = std::nullopt);

  SessionState Create(const CreateRequest& request);
  // Replay sessions: records the guess for the current stroke and reveals the
  // next one. Free-draw sessions must pass the new stroke.
  SessionState Advance(const std::string& id, const std::string& human_guess,
                       const std::optional<corpus::Stroke>& stroke = std::nullopt);
  // Ends a free-draw session with the drawer's category.
  SessionState Reveal(const std::string& id, const std::string& category);
  SessionState Get(const std::string& id) const;
  StepVerdicts Score(const std::string& id, const lexnet::CriteriaSet& criteria) const;
  RatingAck SubmitRating(const std::string& id, const std::string& judge, GuesserType type,
                         int rating, bool scale_reversed);
  ExportBundle Export(const ExportFilter& filter) const;
  // Normalized human guesses of every revealed session.
  corpus::Corpus RevealedCorpus() const;

  std::size_t size() const;
  const Resources& resources() const { return res_; }

 private:
  struct Slot {
    mutable std::mutex mu;
    SessionState state;
    std::vector<nn::Vec> features;  // raw features per revealed prefix
  };

  std::shared_ptr<Slot> Find(const std::string& id) const;
  void Apply(const nlohmann::json& event);
  void Log(const nlohmann::json& event);
  SessionState CreateLocked(const CreateRequest& request, const std::string& id);
  void RecordStep(Slot& slot, const std::string& guess);
  void AdvanceLocked(Slot& slot, const std::string& guess,
                     const std::optional<corpus::Stroke>& stroke);
  void RevealLocked(Slot& slot, const std::string& category);
  RatingAck RateLocked(Slot& slot, const std::string& judge, GuesserType type, int canonical);
  corpus::Record NormalizedRecord(const SessionState& s) const;

  Resources res_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_id_ = 1;
  std::mutex log_mu_;
  std::optional<std::filesystem::path> log_path_;
  std::ofstream log_;
};

nlohmann::json SessionToJson(const SessionState& s);
nlohmann::json VerdictsToJson(const StepVerdicts& v);

// HTTP front end. Blocks in Listen until Stop is called.
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  bool Listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it.
  int BindAnyPort(const std::string& host);
  bool ListenAfterBind();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sketchguess::gateway

#endif  // SKETCHGUESS_GATEWAY_HPP_
