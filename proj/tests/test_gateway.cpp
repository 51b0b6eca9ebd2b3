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

#include <set>
#include <thread>

#include "doctest.h"
#include "sketchguess/corpus.hpp"
#include "sketchguess/error.hpp"
#include "sketchguess/gateway.hpp"
#include "test_support.hpp"
// After the Eigen-using headers: resolv.h defines _res.
#include "httplib.h"

using namespace sketchguess;
using namespace sketchguess::gateway;
using nlohmann::json;
using sketchguess::testing::SourcePath;
using sketchguess::testing::TempDir;

namespace {

// A guesser whose projection ignores its input and always lands on `word`.
std::shared_ptr<const ModelGuesser> ConstantModel(
    const std::shared_ptr<const lexnet::EmbeddingTable>& table, const std::string& word,
    const corpus::FeatureConfig& features) {
  const int dim = features.feature_dim();
  auto params = nn::LstmParams::Zeros(dim, 4, static_cast<int>(table->dim()));
  auto v = table->Vector(word);
  for (std::size_t i = 0; i < v.size(); ++i) params.b_out[static_cast<int>(i)] = v[i];
  guesser::GuesserModel model(features, guesser::FeatureNormalizer::Identity(dim), table, params,
                              {}, {});
  return std::make_shared<const ModelGuesser>(std::move(model));
}

Resources MiniResources(bool with_model = true) {
  Resources r;
  auto corpus = corpus::ParseCorpus(SourcePath("data/corpus/mini.jsonl"), true).corpus;
  r.lexicon = std::make_shared<const corpus::TextLexicon>(
      corpus::TextLexicon::Load(SourcePath("data/lexicon"), corpus.Categories()));
  r.corpus = std::make_shared<const corpus::Corpus>(std::move(corpus));
  r.taxonomy =
      std::make_shared<const lexnet::Taxonomy>(lexnet::Taxonomy::Load(SourcePath("data/lexicon")));
  if (with_model) {
    auto table = std::make_shared<const lexnet::EmbeddingTable>(
        lexnet::EmbeddingTable::Load(SourcePath("data/lexicon/embeddings.txt")));
    r.model = ConstantModel(table, "firearm", r.features);
  }
  return r;
}

CreateRequest ById(const std::string& id) {
  CreateRequest c;
  c.sketch_id = id;
  return c;
}

// Answers every step (empty guesses except where given) until revealed.
SessionState PlayThrough(SessionStore& store, const std::string& id,
                         const std::map<std::size_t, std::string>& guesses = {}) {
  SessionState s = store.Get(id);
  std::size_t step = 0;
  while (s.phase == Phase::kActive) {
    auto it = guesses.find(step++);
    s = store.Advance(id, it == guesses.end() ? "" : it->second);
  }
  return s;
}

}  // namespace

TEST_CASE("create sessions") {
  SessionStore store(MiniResources());
  auto s = store.Create({});
  CHECK(s.cursor == 1);
  CHECK(s.phase == Phase::kActive);
  auto j = SessionToJson(s);
  CHECK(j["strokes"].size() == 1);
  CHECK(!j.contains("category"));

  CHECK_THROWS_AS(store.Create(ById("nope")), Error);
  CreateRequest cat;
  cat.category = "unicorn";
  CHECK_THROWS_AS(store.Create(cat), Error);
  cat.category = "giraffe";
  CHECK(store.Create(cat).sketch.category == "giraffe");

  Resources empty = MiniResources(false);
  empty.corpus = std::make_shared<const corpus::Corpus>();
  SessionStore none(empty);
  CHECK_THROWS_AS(none.Create({}), Error);
}

TEST_CASE("concurrent creates get distinct ids and independent cursors") {
  SessionStore store(MiniResources());
  std::vector<std::string> ids(16);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    threads.emplace_back([&, i] {
      ids[i] = store.Create({}).session_id;
      store.Advance(ids[i], "cat");
    });
  }
  for (auto& t : threads) t.join();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size());
  CHECK(store.size() == ids.size());
  store.Advance(ids[0], "dog");
  for (std::size_t i = 1; i < ids.size(); ++i) {
    auto s = store.Get(ids[i]);
    CHECK(s.human_guesses == std::vector<std::string>{"cat"});
  }
}

TEST_CASE("replay protocol and guards") {
  SessionStore store(MiniResources());
  auto s = store.Create(ById("mini-07"));  // revolver, 6 strokes
  REQUIRE(s.total_strokes() == 6);
  CHECK_THROWS_AS(store.Score(s.session_id, lexnet::CriteriaSet::Default()), Error);
  CHECK_THROWS_AS(store.SubmitRating(s.session_id, "j", GuesserType::kHuman, 1, false), Error);
  CHECK_THROWS_AS(store.Advance(s.session_id, "", corpus::Stroke{{{0.5, 0.5}}}), Error);
  s = store.Advance(s.session_id, "");
  CHECK(s.human_guesses == std::vector<std::string>{""});
  CHECK(s.cursor == 2);
  s = PlayThrough(store, s.session_id);
  CHECK(s.phase == Phase::kRevealed);
  CHECK(s.human_guesses.size() == 6);
  CHECK(s.model_guesses.size() == 6);
  CHECK(SessionToJson(s)["category"] == "revolver");
  auto before = SessionToJson(store.Get(s.session_id));
  try {
    store.Advance(s.session_id, "x");
    FAIL("advance on a revealed session");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFailedPrecondition);
  }
  CHECK(SessionToJson(store.Get(s.session_id)) == before);
  CHECK_THROWS_AS(store.Get("s999999"), Error);
}

TEST_CASE("scoring: final human guess and the firearm model") {
  SessionStore store(MiniResources());
  auto s = store.Create(ById("mini-07"));
  s = PlayThrough(store, s.session_id, {{5, "Revolver"}});
  REQUIRE(s.model_guesses.back().front() == "firearm");

  auto em = store.Score(s.session_id, lexnet::CriteriaSet{lexnet::Criterion::kEM});
  CHECK(em.human_final);
  CHECK(!em.model_final);

  auto base = store.Score(s.session_id, lexnet::CriteriaSet::Default());
  CHECK(!base.model_final);
  auto pc = store.Score(s.session_id, lexnet::CriteriaSet::Parse("EM|SUB|SYN|HY-PC"));
  CHECK(pc.model_final);
  CHECK(pc.model.size() == 6);
}

TEST_CASE("ratings") {
  CHECK(CanonicalRating(2, true) == -2);
  CHECK(CanonicalRating(0, true) == 0);
  CHECK(CanonicalRating(-1, false) == -1);
  CHECK_THROWS_AS(CanonicalRating(3, false), Error);

  SessionStore store(MiniResources());
  auto s = PlayThrough(store, store.Create({}).session_id);
  auto first = store.SubmitRating(s.session_id, "j1", GuesserType::kModel, 2, true);
  CHECK(first.stored == -2);
  CHECK(!first.replaced);
  auto again = store.SubmitRating(s.session_id, "j1", GuesserType::kModel, 1, false);
  CHECK(again.stored == 1);
  CHECK(again.replaced == -2);
  CHECK(store.Get(s.session_id).ratings.size() == 1);
  CHECK_THROWS_AS(store.SubmitRating(s.session_id, "j1", GuesserType::kHuman, -3, false), Error);
}

TEST_CASE("export normalizes guesses and round-trips through the corpus parser") {
  SessionStore store(MiniResources());
  auto g = store.Create(ById("mini-04"));  // giraffe, 5 strokes
  PlayThrough(store, g.session_id, {{1, "Girafe"}});
  PlayThrough(store, store.Create(ById("mini-07")).session_id, {{2, "a gun"}});
  auto third = PlayThrough(store, store.Create({}).session_id);
  store.SubmitRating(third.session_id, "j", GuesserType::kHuman, -1, false);
  store.Create({});  // still active, not exported

  auto bundle = store.Export({});
  CHECK(bundle.sessions == 3);
  CHECK(std::count(bundle.corpus.begin(), bundle.corpus.end(), '\n') == 3);
  auto parsed = corpus::ParseCorpusText(bundle.corpus, true).corpus;
  REQUIRE(parsed.size() == 3);
  CHECK(parsed.records[0].guesses.guesses ==
        std::vector<std::string>{"", "giraffe", "giraffe", "giraffe", "giraffe"});
  CHECK(parsed.records[0].sketch.strokes == store.Get(g.session_id).sketch.strokes);
  CHECK(corpus::FormatCorpus(parsed) == bundle.corpus);
  CHECK(bundle.ratings == third.session_id + "\tj\thuman\t-1\n");

  CHECK(store.Export({"giraffe"}).sessions == 1);
  CHECK_THROWS_AS(store.Export({"cat"}), Error);
}

TEST_CASE("free drawing") {
  SessionStore store(MiniResources());
  CreateRequest free;
  free.free_draw = true;
  auto s = store.Create(free);
  CHECK(s.cursor == 0);
  CHECK_THROWS_AS(store.Advance(s.session_id, "cat"), Error);
  s = store.Advance(s.session_id, "", corpus::Stroke{{{0.1, 0.1}, {0.9, 0.9}}});
  s = store.Advance(s.session_id, "Cat", corpus::Stroke{{{0.1, 0.9}, {0.9, 0.1}}});
  CHECK(s.cursor == 2);
  CHECK(s.model_guesses.size() == 2);
  s = store.Reveal(s.session_id, "Cat");
  CHECK(s.phase == Phase::kRevealed);
  CHECK(s.sketch.category == "cat");
  auto parsed = corpus::ParseCorpusText(store.Export({}).corpus, true).corpus;
  CHECK(parsed.records[0].guesses.guesses == std::vector<std::string>{"", "cat"});

  auto replay = store.Create({});
  CHECK_THROWS_AS(store.Reveal(replay.session_id, "cat"), Error);
}

TEST_CASE("the log replays to the same state") {
  TempDir dir("store");
  auto log = dir / "sessions.log";
  std::string exported;
  std::vector<json> views;
  {
    SessionStore store(MiniResources(), log);
    auto a = store.Create({});
    PlayThrough(store, a.session_id, {{0, "Horse"}});
    store.SubmitRating(a.session_id, "j", GuesserType::kHuman, 2, true);
    auto b = store.Create(ById("mini-03"));
    store.Advance(b.session_id, "dog");
    exported = store.Export({}).corpus;
    views = {SessionToJson(store.Get(a.session_id)), SessionToJson(store.Get(b.session_id))};
  }
  SessionStore again(MiniResources(), log);
  CHECK(again.size() == 2);
  CHECK(again.Export({}).corpus == exported);
  CHECK(SessionToJson(again.Get(views[0]["session_id"])) == views[0]);
  CHECK(SessionToJson(again.Get(views[1]["session_id"])) == views[1]);
  // New ids continue after the replayed ones.
  CHECK(again.Create({}).session_id == "s000003");
}

TEST_CASE("same requests give the same responses") {
  SessionStore a(MiniResources()), b(MiniResources());
  for (int i = 0; i < 5; ++i) {
    auto x = a.Create({}), y = b.Create({});
    CHECK(SessionToJson(x) == SessionToJson(y));
    CHECK(SessionToJson(a.Advance(x.session_id, "cat")) == SessionToJson(b.Advance(y.session_id, "cat")));
  }
}

TEST_CASE("http api") {
  SessionStore store(MiniResources());
  HttpServer server(store);
  int port = server.BindAnyPort("127.0.0.1");
  REQUIRE(port > 0);
  std::thread serving([&] { server.ListenAfterBind(); });
  httplib::Client cli("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body) {
    return cli.Post(path, body.dump(), "application/json");
  };

  auto health = cli.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["model"] == true);

  auto created = post("/sessions", {{"selector", "id"}, {"sketch_id", "mini-04"}});
  REQUIRE(created);
  CHECK(created->status == 201);
  auto s = json::parse(created->body);
  std::string id = s["session_id"];
  CHECK(s["cursor"] == 1);
  CHECK(s["phase"] == "ACTIVE");

  CHECK(post("/sessions", {{"selector", "id"}, {"sketch_id", "zzz"}})->status == 404);
  CHECK(post("/sessions", {{"selector", "bogus"}})->status == 400);
  auto bad_json = cli.Post("/sessions", "{oops", "application/json");
  CHECK(bad_json->status == 400);
  CHECK(json::parse(bad_json->body).contains("code"));

  CHECK(post("/sessions/" + id + "/score", json::object())->status == 409);
  for (int i = 0; i < 5; ++i) {
    auto r = post("/sessions/" + id + "/advance", {{"guess", i == 1 ? "Girafe" : ""}});
    REQUIRE(r->status == 200);
    s = json::parse(r->body);
  }
  CHECK(s["phase"] == "REVEALED");
  CHECK(s["category"] == "giraffe");
  CHECK(post("/sessions/" + id + "/advance", {{"guess", ""}})->status == 409);

  auto score = json::parse(post("/sessions/" + id + "/score", {{"criteria", "EM"}})->body);
  CHECK(score["criteria"] == "EM");
  CHECK(score.contains("human"));

  auto rate = json::parse(post("/sessions/" + id + "/ratings",
                               {{"judge", "j"}, {"type", "model"}, {"rating", 2}, {"scale_reversed", true}})
                              ->body);
  CHECK(rate["stored"] == -2);
  rate = json::parse(post("/sessions/" + id + "/ratings", {{"judge", "j"}, {"type", "model"}, {"rating", 1}})->body);
  CHECK(rate["replaced"] == -2);
  CHECK(rate.contains("audit"));
  CHECK(post("/sessions/" + id + "/ratings", {{"judge", "j"}, {"type", "model"}, {"rating", 9}})->status == 400);

  auto exp = json::parse(cli.Get("/export")->body);
  CHECK(exp["sessions"] == 1);
  auto rec = corpus::ParseRecordLine(exp["corpus"].get<std::string>().substr(0, exp["corpus"].get<std::string>().find('\n')));
  CHECK(rec.guesses.guesses[1] == "giraffe");
  CHECK(cli.Get("/export?category=cat")->status == 404);

  auto hist = json::parse(cli.Get("/analytics/histogram")->body);
  CHECK(hist["buckets"]["1"] == 1);
  auto first = json::parse(cli.Get("/analytics/first-guess")->body);
  CHECK(first["categories"][0]["category"] == "giraffe");
  CHECK(first["categories"][0]["median"] == doctest::Approx(0.4));

  auto got = cli.Get("/sessions/" + id);
  CHECK(json::parse(got->body) == SessionToJson(store.Get(id)));
  auto missing = cli.Get("/sessions/nope");
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["code"] == "not_found");
  CHECK(cli.Get("/no/such/route")->status == 404);

  server.Stop();
  serving.join();
}
