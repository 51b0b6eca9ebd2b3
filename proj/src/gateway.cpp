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

#include <cstdio>
#include <random>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/gateway.hpp"

namespace sketchguess::gateway {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Model attachment.

ModelGuesser::ModelGuesser(guesser::GuesserModel model) : model_(std::move(model)) {}
ModelGuesser::ModelGuesser(guesser::TwoPhaseModel model) : model_(std::move(model)) {}

ModelGuesser ModelGuesser::FromCheckpoint(const nn::Checkpoint& ckpt,
                                          std::shared_ptr<const lexnet::EmbeddingTable> table) {
  if (guesser::CheckpointKind(ckpt) == "unified") {
    return ModelGuesser(guesser::UnifiedFromCheckpoint(ckpt, std::move(table)));
  }
  return ModelGuesser(guesser::TwoPhaseFromCheckpoint(ckpt, std::move(table)));
}

const corpus::FeatureConfig& ModelGuesser::feature_config() const {
  if (auto* u = std::get_if<guesser::GuesserModel>(&model_)) return u->feature_config();
  return std::get<guesser::TwoPhaseModel>(model_).phase2().feature_config();
}

int ModelGuesser::input_dim() const {
  if (auto* u = std::get_if<guesser::GuesserModel>(&model_)) return u->params().input_dim;
  return std::get<guesser::TwoPhaseModel>(model_).phase2().params().input_dim;
}

std::vector<std::string> ModelGuesser::Guess(const std::vector<nn::Vec>& prefix,
                                             std::size_t k) const {
  if (prefix.empty()) throw Error(ErrorCode::kInvalidArgument, "empty feature prefix");
  if (auto* u = std::get_if<guesser::GuesserModel>(&model_)) {
    // Recurrence is causal, so rerunning the prefix equals streaming.
    auto out = u->Infer(prefix, k);
    return guesser::ToPrediction(out.back()).ranked;
  }
  return std::get<guesser::TwoPhaseModel>(model_).PredictFull(prefix, k).back().ranked;
}

// ---------------------------------------------------------------------------

std::string_view PhaseName(Phase p) { return p == Phase::kActive ? "ACTIVE" : "REVEALED"; }

std::string_view GuesserTypeName(GuesserType t) {
  return t == GuesserType::kHuman ? "human" : "model";
}

GuesserType ParseGuesserType(std::string_view name) {
  if (name == "human") return GuesserType::kHuman;
  if (name == "model") return GuesserType::kModel;
  throw Error(ErrorCode::kInvalidArgument, "guesser type must be human or model");
}

int CanonicalRating(int rating, bool scale_reversed) {
  if (rating < -2 || rating > 2) {
    throw Error(ErrorCode::kInvalidArgument, "rating must lie in [-2, 2]");
  }
  return scale_reversed ? -rating : rating;
}

namespace {

std::string SessionId(std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(n));
  return buf;
}

json StrokeJson(const corpus::Stroke& s) {
  json pts = json::array();
  for (const auto& p : s.points) pts.push_back(json::array({p.x, p.y}));
  return pts;
}

std::string ModelWord(const std::vector<std::string>& ranked) {
  if (ranked.empty() || ranked.front() == lexnet::kNoGuessToken) return "";
  return ranked.front();
}

}  // namespace

// ---------------------------------------------------------------------------

SessionStore::SessionStore(Resources resources, std::optional<std::filesystem::path> log_path)
    : res_(std::move(resources)), log_path_(std::move(log_path)) {
  if (!res_.corpus || !res_.lexicon || !res_.taxonomy) {
    throw Error(ErrorCode::kInvalidArgument, "store needs corpus, lexicon and taxonomy");
  }
  if (res_.model && res_.model->input_dim() != res_.features.feature_dim()) {
    throw Error(ErrorCode::kInvalidArgument,
                "model input dimension differs from the live feature extractor");
  }
  if (res_.top_k == 0) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
  if (!log_path_) return;
  {
    std::ifstream in(*log_path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json event = json::parse(line, nullptr, false);
      if (event.is_discarded() || !event.is_object()) {
        throw Error(ErrorCode::kParse, "session log line " + std::to_string(lineno) + " is not JSON");
      }
      Apply(event);
    }
  }
  log_.open(*log_path_, std::ios::app);
  if (!log_) throw Error(ErrorCode::kIo, "cannot open session log " + log_path_->string());
}

void SessionStore::Log(const json& event) {
  if (!log_path_) return;
  std::lock_guard lock(log_mu_);
  log_ << event.dump() << '\n';
  log_.flush();
}

std::shared_ptr<SessionStore::Slot> SessionStore::Find(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session " + id);
  return it->second;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(map_mu_);
  return sessions_.size();
}

void SessionStore::Apply(const json& e) {
  const std::string op = e.at("op").get<std::string>();
  const std::string id = e.at("id").get<std::string>();
  if (op == "create") {
    CreateRequest req;
    req.free_draw = e.at("free_draw").get<bool>();
    req.subject = e.at("subject").get<std::string>();
    if (!req.free_draw) req.sketch_id = e.at("sketch_id").get<std::string>();
    std::unique_lock lock(map_mu_);
    CreateLocked(req, id);
    // Ids are s<number>; keep the counter past every replayed id.
    next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(1)) + 1);
    return;
  }
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  if (op == "advance") {
    std::optional<corpus::Stroke> stroke;
    if (e.contains("stroke")) stroke = corpus::ParseStrokeJson(e["stroke"].dump());
    AdvanceLocked(*slot, e.at("guess").get<std::string>(), stroke);
  } else if (op == "reveal") {
    RevealLocked(*slot, e.at("category").get<std::string>());
  } else if (op == "rate") {
    RateLocked(*slot, e.at("judge").get<std::string>(),
               ParseGuesserType(e.at("type").get<std::string>()), e.at("value").get<int>());
  } else {
    throw Error(ErrorCode::kParse, "unknown session log op " + op);
  }
}

SessionState SessionStore::CreateLocked(const CreateRequest& req, const std::string& id) {
  auto slot = std::make_shared<Slot>();
  SessionState& s = slot->state;
  s.session_id = id;
  s.free_draw = req.free_draw;
  s.subject = req.subject;
  if (req.free_draw) {
    s.sketch.sketch_id = id;
    s.cursor = 0;
  } else {
    const auto& records = res_.corpus->records;
    auto it = std::find_if(records.begin(), records.end(), [&](const corpus::Record& r) {
      return r.sketch.sketch_id == *req.sketch_id;
    });
    if (it == records.end()) throw Error(ErrorCode::kNotFound, "unknown sketch " + *req.sketch_id);
    s.sketch = it->sketch;
    s.cursor = 1;
  }
  sessions_.emplace(id, slot);
  return s;
}

SessionState SessionStore::Create(const CreateRequest& request) {
  if (request.subject.empty()) throw Error(ErrorCode::kInvalidArgument, "empty subject");
  if (request.free_draw && (request.sketch_id || request.category)) {
    throw Error(ErrorCode::kInvalidArgument, "free drawing takes no sketch selector");
  }
  if (request.sketch_id && request.category) {
    throw Error(ErrorCode::kInvalidArgument, "select by id or by category, not both");
  }
  std::unique_lock lock(map_mu_);
  const std::string id = SessionId(next_id_);
  CreateRequest resolved = request;
  if (!request.free_draw && !request.sketch_id) {
    std::vector<const corpus::Record*> pool;
    for (const auto& r : res_.corpus->records) {
      if (!request.category || r.sketch.category == *request.category) pool.push_back(&r);
    }
    if (pool.empty()) {
      throw Error(ErrorCode::kNotFound, request.category
                                            ? "no sketches of category " + *request.category
                                            : std::string("corpus is empty"));
    }
    std::mt19937_64 rng(res_.seed ^ (next_id_ * 0x9e3779b97f4a7c15ULL));
    resolved.sketch_id = pool[static_cast<std::size_t>(rng() % pool.size())]->sketch.sketch_id;
  }
  SessionState s = CreateLocked(resolved, id);
  ++next_id_;
  json e{{"op", "create"}, {"id", id}, {"free_draw", resolved.free_draw},
         {"subject", resolved.subject}};
  if (resolved.sketch_id) e["sketch_id"] = *resolved.sketch_id;
  Log(e);
  return s;
}

void SessionStore::AdvanceLocked(Slot& slot, const std::string& guess,
                                 const std::optional<corpus::Stroke>& stroke) {
  if (slot.state.phase != Phase::kActive) {
    throw Error(ErrorCode::kFailedPrecondition, "session " + slot.state.session_id + " is revealed");
  }
  if (guess.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "guess contains control characters");
  }
  // Work on copies so a failure leaves the session untouched.
  SessionState s = slot.state;
  std::vector<nn::Vec> features = slot.features;
  if (s.free_draw) {
    if (!stroke) throw Error(ErrorCode::kInvalidArgument, "free drawing needs a stroke");
    s.sketch.strokes.push_back(*stroke);
    ++s.cursor;
  } else if (stroke) {
    throw Error(ErrorCode::kInvalidArgument, "replay sessions take no strokes");
  }
  s.human_guesses.push_back(guess);
  if (res_.model) {
    while (features.size() < s.cursor) {
      auto raw = corpus::ExtractFeatures(s.sketch.Prefix(features.size() + 1), res_.features);
      features.push_back(Eigen::Map<const nn::Vec>(raw.data(), static_cast<Eigen::Index>(raw.size())));
    }
    s.model_guesses.push_back(res_.model->Guess(features, res_.top_k));
  } else {
    s.model_guesses.emplace_back();
  }
  if (!s.free_draw) {
    if (s.cursor == s.total_strokes()) {
      s.phase = Phase::kRevealed;
    } else {
      ++s.cursor;
    }
  }
  slot.state = std::move(s);
  slot.features = std::move(features);
}

SessionState SessionStore::Advance(const std::string& id, const std::string& human_guess,
                                   const std::optional<corpus::Stroke>& stroke) {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  AdvanceLocked(*slot, human_guess, stroke);
  json e{{"op", "advance"}, {"id", id}, {"guess", human_guess}};
  if (stroke) e["stroke"] = StrokeJson(*stroke);
  Log(e);
  return slot->state;
}

void SessionStore::RevealLocked(Slot& slot, const std::string& category) {
  SessionState& s = slot.state;
  if (!s.free_draw) {
    throw Error(ErrorCode::kFailedPrecondition, "only free-draw sessions are revealed by the client");
  }
  if (s.phase != Phase::kActive) throw Error(ErrorCode::kFailedPrecondition, "already revealed");
  if (s.cursor == 0) throw Error(ErrorCode::kFailedPrecondition, "nothing has been drawn");
  std::string normalized = corpus::ToLower(category);
  if (corpus::Tokenize(normalized).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "category must be non-empty");
  }
  if (normalized.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "category contains control characters");
  }
  s.sketch.category = normalized;
  s.phase = Phase::kRevealed;
}

SessionState SessionStore::Reveal(const std::string& id, const std::string& category) {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  RevealLocked(*slot, category);
  Log({{"op", "reveal"}, {"id", id}, {"category", category}});
  return slot->state;
}

SessionState SessionStore::Get(const std::string& id) const {
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  return slot->state;
}

corpus::Record SessionStore::NormalizedRecord(const SessionState& s) const {
  corpus::Record r;
  r.sketch = s.sketch;
  r.sketch.sketch_id = s.session_id;
  r.guesses.sketch_id = s.session_id;
  r.guesses.subject_id = s.subject;
  corpus::GuessSequence raw{s.session_id, s.subject, s.human_guesses};
  auto out = corpus::PreprocessGuessSequence(raw, *res_.lexicon);
  if (auto* g = std::get_if<corpus::GuessSequence>(&out)) {
    r.guesses.guesses = g->guesses;
  } else {
    r.guesses.guesses.assign(s.human_guesses.size(), "");
  }
  return r;
}

StepVerdicts SessionStore::Score(const std::string& id,
                                 const lexnet::CriteriaSet& criteria) const {
  SessionState s = Get(id);
  if (s.phase != Phase::kRevealed) {
    throw Error(ErrorCode::kFailedPrecondition, "session " + id + " is not revealed");
  }
  const corpus::Record r = NormalizedRecord(s);
  const std::string& truth = s.sketch.category;
  auto verdict = [&](const std::string& guess) {
    return !guess.empty() && lexnet::Match(guess, truth, *res_.taxonomy, criteria).verdict;
  };
  StepVerdicts v;
  for (const auto& g : r.guesses.guesses) v.human.push_back(verdict(g));
  for (const auto& m : s.model_guesses) v.model.push_back(verdict(ModelWord(m)));
  v.human_final = !v.human.empty() && v.human.back();
  v.model_final = !v.model.empty() && v.model.back();
  return v;
}

RatingAck SessionStore::RateLocked(Slot& slot, const std::string& judge, GuesserType type,
                                   int canonical) {
  if (slot.state.phase != Phase::kRevealed) {
    throw Error(ErrorCode::kFailedPrecondition, "ratings need a revealed session");
  }
  if (judge.empty() || judge.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "judge id must be non-empty plain text");
  }
  CanonicalRating(canonical, false);
  RatingAck ack{canonical, std::nullopt};
  auto [it, inserted] = slot.state.ratings.try_emplace({judge, type}, canonical);
  if (!inserted) {
    ack.replaced = it->second;
    it->second = canonical;
  }
  return ack;
}

RatingAck SessionStore::SubmitRating(const std::string& id, const std::string& judge,
                                     GuesserType type, int rating, bool scale_reversed) {
  const int canonical = CanonicalRating(rating, scale_reversed);
  auto slot = Find(id);
  std::lock_guard lock(slot->mu);
  RatingAck ack = RateLocked(*slot, judge, type, canonical);
  Log({{"op", "rate"},
       {"id", id},
       {"judge", judge},
       {"type", GuesserTypeName(type)},
       {"value", canonical}});
  return ack;
}

ExportBundle SessionStore::Export(const ExportFilter& filter) const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [id, slot] : sessions_) slots.push_back(slot);
  }
  ExportBundle out;
  std::ostringstream corpus_text, ratings_text;
  for (const auto& slot : slots) {
    SessionState s;
    {
      std::lock_guard lock(slot->mu);
      s = slot->state;
    }
    if (s.phase != Phase::kRevealed) continue;
    if (filter.category && s.sketch.category != *filter.category) continue;
    corpus_text << corpus::FormatRecordLine(NormalizedRecord(s)) << '\n';
    for (const auto& [key, value] : s.ratings) {
      ratings_text << s.session_id << '\t' << key.first << '\t' << GuesserTypeName(key.second)
                   << '\t' << value << '\n';
    }
    ++out.sessions;
  }
  if (out.sessions == 0) throw Error(ErrorCode::kNotFound, "no revealed sessions match");
  out.corpus = corpus_text.str();
  out.ratings = ratings_text.str();
  return out;
}

corpus::Corpus SessionStore::RevealedCorpus() const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [id, slot] : sessions_) slots.push_back(slot);
  }
  corpus::Corpus c;
  for (const auto& slot : slots) {
    std::lock_guard lock(slot->mu);
    if (slot->state.phase == Phase::kRevealed) c.records.push_back(NormalizedRecord(slot->state));
  }
  return c;
}

// ---------------------------------------------------------------------------

json SessionToJson(const SessionState& s) {
  json strokes = json::array();
  const std::size_t shown = std::min(s.cursor, s.sketch.size());
  for (std::size_t i = 0; i < shown; ++i) strokes.push_back(StrokeJson(s.sketch.strokes[i]));
  json ratings = json::array();
  for (const auto& [key, value] : s.ratings) {
    ratings.push_back({{"judge", key.first}, {"type", GuesserTypeName(key.second)}, {"value", value}});
  }
  json j{{"session_id", s.session_id},
         {"mode", s.free_draw ? "free" : "replay"},
         {"subject", s.subject},
         {"cursor", s.cursor},
         {"total_strokes", s.total_strokes()},
         {"phase", PhaseName(s.phase)},
         {"strokes", std::move(strokes)},
         {"human_guesses", s.human_guesses},
         {"model_guesses", s.model_guesses},
         {"ratings", std::move(ratings)}};
  if (s.phase == Phase::kRevealed) j["category"] = s.sketch.category;
  return j;
}

json VerdictsToJson(const StepVerdicts& v) {
  return {{"human", v.human},
          {"model", v.model},
          {"human_final", v.human_final},
          {"model_final", v.model_final}};
}

}  // namespace sketchguess::gateway
