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

// Command-line front end for the corpus, training, evaluation and serving
// pipeline.

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sketchguess/error.hpp"
#include "sketchguess/eval.hpp"
#include "sketchguess/gateway.hpp"
#include "sketchguess/guesser.hpp"
#include "sketchguess/stats.hpp"

namespace fs = std::filesystem;
using namespace sketchguess;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string format = "text";
  bool machine() const { return format == "machine"; }
};

std::vector<int> ParseIntList(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, std::string("bad ") + what + " list: " + text);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("empty ") + what + " list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> SplitTab(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find('\t', pos);
    cols.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) return cols;
    pos = end + 1;
  }
}

fs::path EmbeddingsPath(const std::string& explicit_path, const std::string& lexicon_dir) {
  if (!explicit_path.empty()) return explicit_path;
  if (lexicon_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pass --embeddings or --lexicon-dir");
  }
  return fs::path(lexicon_dir) / "embeddings.txt";
}

std::shared_ptr<const lexnet::EmbeddingTable> LoadTable(const fs::path& path) {
  return std::make_shared<const lexnet::EmbeddingTable>(lexnet::EmbeddingTable::Load(path));
}

void PrintStat(const Globals& g, std::string_view metric, std::string_view key, double value) {
  if (g.machine()) {
    std::cout << stats::MachineLine(metric, key, value) << '\n';
  } else {
    std::cout << std::left << std::setw(28) << metric << std::setw(16) << key << value << '\n';
  }
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string in, out, lexicon_dir;
  bool strict = false;
};

int RunPreprocess(const Globals& g, const PreprocessArgs& a) {
  auto parsed = corpus::ParseCorpus(a.in, a.strict);
  auto lex = corpus::TextLexicon::Load(a.lexicon_dir, parsed.corpus.Categories());
  corpus::PreprocessStats st;
  auto out = corpus::PreprocessCorpus(parsed.corpus, lex, &st);
  corpus::WriteCorpus(out, a.out);
  PrintStat(g, "preprocess", "input", static_cast<double>(st.input));
  PrintStat(g, "preprocess", "removed", static_cast<double>(st.removed));
  PrintStat(g, "preprocess", "skipped_lines", static_cast<double>(parsed.skipped));
  PrintStat(g, "preprocess", "output", static_cast<double>(out.size()));
  return 0;
}

struct SplitArgs {
  std::string in, out_dir;
  std::vector<double> ratios{0.60, 0.25, 0.15};
};

int RunSplit(const Globals& g, const SplitArgs& a) {
  if (a.ratios.size() != 3) throw Error(ErrorCode::kInvalidArgument, "--ratios takes three values");
  auto c = corpus::ParseCorpus(a.in, true).corpus;
  auto split = corpus::SplitCorpus(c, {a.ratios[0], a.ratios[1], a.ratios[2]}, g.seed);
  fs::create_directories(a.out_dir);
  corpus::WriteCorpus(split.train, fs::path(a.out_dir) / "train.jsonl");
  corpus::WriteCorpus(split.val, fs::path(a.out_dir) / "val.jsonl");
  corpus::WriteCorpus(split.test, fs::path(a.out_dir) / "test.jsonl");
  PrintStat(g, "split", "train", static_cast<double>(split.train.size()));
  PrintStat(g, "split", "val", static_cast<double>(split.val.size()));
  PrintStat(g, "split", "test", static_cast<double>(split.test.size()));
  return 0;
}

struct AnalyzeArgs {
  std::string in, lexicon_dir, compare, criteria = "EM|SUB|SYN";
  double z = 1.96;
};

// Final-guess correctness per category.
std::map<std::string, std::vector<int>> FinalGuessOutcomes(const corpus::Corpus& c,
                                                           const lexnet::Taxonomy& tax,
                                                           const lexnet::CriteriaSet& crit) {
  std::map<std::string, std::vector<int>> out;
  for (const auto& r : c.records) {
    const auto& gs = r.guesses.guesses;
    const std::string last = gs.empty() ? "" : gs.back();
    bool ok = !last.empty() && lexnet::Match(last, r.sketch.category, tax, crit).verdict;
    out[r.sketch.category].push_back(ok ? 1 : 0);
  }
  return out;
}

int RunAnalyze(const Globals& g, const AnalyzeArgs& a) {
  auto c = corpus::ParseCorpus(a.in, true).corpus;
  auto hist = stats::GuessCountHistogram(c);
  const char* keys[] = {"1", "2", "3", ">=4"};
  for (int i = 0; i < 4; ++i) PrintStat(g, "unique_guesses", keys[i], static_cast<double>(hist[i]));
  for (const auto& f : stats::FirstGuessByCategory(c)) {
    PrintStat(g, "first_guess_median", f.category, f.median);
    PrintStat(g, "first_guess_mad", f.category, f.mad);
  }
  if (a.lexicon_dir.empty()) return 0;

  auto tax = lexnet::Taxonomy::Load(a.lexicon_dir);
  auto crit = lexnet::CriteriaSet::Parse(a.criteria);
  auto human = FinalGuessOutcomes(c, tax, crit);
  for (const auto& [cat, samples] : human) {
    long k = std::count(samples.begin(), samples.end(), 1);
    auto ci = stats::WilsonInterval(k, static_cast<long>(samples.size()), a.z);
    PrintStat(g, "accuracy", cat, static_cast<double>(k) / static_cast<double>(samples.size()));
    PrintStat(g, "accuracy_ci_lo", cat, ci.lo);
    PrintStat(g, "accuracy_ci_hi", cat, ci.hi);
  }
  if (a.compare.empty()) return 0;

  // The comparison corpus holds another guesser's sequences for the same sketches.
  auto other = FinalGuessOutcomes(corpus::ParseCorpus(a.compare, true).corpus, tax, crit);
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& [cat, samples] : human) {
    auto it = other.find(cat);
    if (it == other.end()) continue;
    auto d = stats::CohensD(stats::CategoryAccuracy::FromSamples(cat, it->second),
                            stats::CategoryAccuracy::FromSamples(cat, samples));
    if (!d) continue;
    PrintStat(g, "cohens_d", cat, *d);
    sum += *d;
    ++defined;
  }
  if (defined > 0) {
    double mean = sum / static_cast<double>(defined);
    PrintStat(g, "cohens_d_mean", "all", mean);
    if (!g.machine()) std::cout << "effect size: " << stats::BandName(stats::BandFor(mean)) << '\n';
  }
  return 0;
}

struct TrainArgs {
  std::string manifest, model;
};

int RunTrain(const Globals& g, const TrainArgs& a) {
  auto m = guesser::TrainManifest::Load(a.manifest);
  if (!a.model.empty()) {
    if (a.model != "unified" && a.model != "two-phase") {
      throw Error(ErrorCode::kInvalidArgument, "--model must be unified or two-phase");
    }
    m.model = a.model;
  }
  if (g.seed_given) m.config.phase2.seed = g.seed;
  auto run = guesser::RunManifest(m);
  for (const auto& [hidden, acc] : run.val_acc1_by_hidden) {
    PrintStat(g, "val_acc@1", "hidden=" + std::to_string(hidden), acc);
  }
  PrintStat(g, "best_hidden", m.model, run.best_hidden);
  if (!g.machine()) std::cout << "checkpoint written to " << m.checkpoint.string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint, corpus, lexicon_dir, embeddings, features;
  std::string mode = "guess-portion";
  std::string k = "1,3,5";
  std::string delta = "0,1,2";
  std::string window;
  bool exclude_no_guess = false;
  bool step_weighted = false;
};

int RunEval(const Globals& g, const EvalArgs& a) {
  auto mode = eval::ParseEvalMode(a.mode);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "--mode must be guess-portion or full");
  eval::EvalConfig cfg;
  cfg.mode = *mode;
  cfg.step_weighted = a.step_weighted;
  cfg.k_values = ParseIntList(a.k, "k");
  if (!a.window.empty()) {
    cfg.deltas.clear();
    for (int w : ParseIntList(a.window, "window")) cfg.deltas.push_back(eval::DeltaFromWindowWidth(w));
  } else {
    cfg.deltas = ParseIntList(a.delta, "delta");
  }
  cfg.Validate();
  const std::size_t kmax = static_cast<std::size_t>(cfg.k_values.back());

  auto ckpt = nn::LoadCheckpoint(a.checkpoint);
  auto table = LoadTable(EmbeddingsPath(a.embeddings, a.lexicon_dir));
  auto c = corpus::ParseCorpus(a.corpus, true).corpus;

  std::vector<eval::MetricRow> rows;
  std::vector<std::vector<std::string>> truths;
  std::vector<eval::SequencePrediction> preds;
  const std::string mode_name(eval::EvalModeName(cfg.mode));

  auto make_source = [&](const corpus::FeatureConfig& fc) {
    if (!a.features.empty()) {
      return guesser::FeatureSource(std::make_shared<const corpus::FeatureFile>(
          corpus::FeatureFile::Load(a.features)));
    }
    return guesser::FeatureSource(fc);
  };

  if (guesser::CheckpointKind(ckpt) == "unified") {
    auto model = guesser::UnifiedFromCheckpoint(ckpt, table);
    if (a.exclude_no_guess) model.include_no_guess = false;
    auto data = guesser::Prepare(c, make_source(model.feature_config()));
    for (const auto& s : data) {
      eval::SequencePrediction p;
      for (const auto& o : model.Infer(s.features, kmax)) p.push_back(guesser::ToPrediction(o));
      preds.push_back(std::move(p));
      truths.push_back(s.guesses);
    }
  } else {
    auto model = guesser::TwoPhaseFromCheckpoint(ckpt, table);
    auto data = guesser::Prepare(c, make_source(model.phase2().feature_config()));
    auto loc = guesser::EvaluateLocalization(model, data, cfg.deltas);
    eval::CheckNonDecreasing(loc, "localization accuracy");
    for (std::size_t i = 0; i < loc.size(); ++i) {
      rows.push_back({"localization", "phase1", cfg.deltas[i], loc[i]});
    }
    for (const auto& s : data) {
      auto gt = eval::TransitionIndex(s.guesses);
      // Guess-portion scoring assumes a perfect phase 1.
      if (cfg.mode == eval::EvalMode::kGuessPortion) {
        if (!gt) continue;
        preds.push_back(model.PredictFrom(s.features, *gt, kmax));
      } else {
        preds.push_back(model.PredictFull(s.features, kmax));
      }
      truths.push_back(s.guesses);
    }
  }
  auto acc = eval::SequenceAccuracy(preds, truths, cfg);
  eval::CheckNonDecreasing(acc, "accuracy");
  for (std::size_t i = 0; i < acc.size(); ++i) {
    rows.push_back({"accuracy", mode_name, cfg.k_values[i], acc[i]});
  }
  std::cout << (g.machine() ? eval::FormatMachine(rows) : eval::FormatTable(rows));
  return 0;
}

struct MatchArgs {
  std::string input, lexicon_dir, criteria = "EM|SUB|SYN", chain;
  double wup_threshold = 0.9;
};

// Input lines: guess<TAB>truth.
int RunMatch(const Globals& g, const MatchArgs& a) {
  auto tax = lexnet::Taxonomy::Load(a.lexicon_dir);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& line : ReadLines(a.input)) {
    if (line.empty()) continue;
    auto cols = SplitTab(line);
    if (cols.size() != 2) throw Error(ErrorCode::kParse, "match line needs guess<TAB>truth: " + line);
    pairs.emplace_back(corpus::ToLower(cols[0]), corpus::ToLower(cols[1]));
  }
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "no pairs to match");

  if (!a.chain.empty()) {
    std::vector<lexnet::CriteriaSet> combos;
    std::stringstream in(a.chain);
    std::string item;
    while (std::getline(in, item, ',')) combos.push_back(lexnet::CriteriaSet::Parse(item, a.wup_threshold));
    auto acc = lexnet::AccuracyByCriteria(pairs, tax, combos);
    for (std::size_t i = 0; i < combos.size(); ++i) PrintStat(g, "match_accuracy", combos[i].ToString(), acc[i]);
    return 0;
  }
  auto crit = lexnet::CriteriaSet::Parse(a.criteria, a.wup_threshold);
  std::size_t hits = 0;
  for (const auto& [guess, truth] : pairs) {
    auto r = lexnet::Match(guess, truth, tax, crit);
    hits += r.verdict ? 1 : 0;
    std::cout << guess << '\t' << truth << '\t' << (r.verdict ? 1 : 0) << '\t'
              << (r.fired.IsSubsetOf(lexnet::CriteriaSet{}) ? std::string("-") : r.fired.ToString())
              << '\n';
  }
  PrintStat(g, "match_accuracy", crit.ToString(),
            static_cast<double>(hits) / static_cast<double>(pairs.size()));
  return 0;
}

struct KnnArgs {
  std::string embeddings, lexicon_dir, word, vector;
  std::size_t k = 5;
};

int RunKnn(const Globals& g, const KnnArgs& a) {
  auto table = LoadTable(EmbeddingsPath(a.embeddings, a.lexicon_dir));
  std::vector<double> q;
  if (!a.word.empty() == !a.vector.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pass exactly one of --word or --vector");
  }
  if (!a.word.empty()) {
    auto v = table->Vector(a.word);
    q.assign(v.begin(), v.end());
  } else {
    std::stringstream in(a.vector);
    std::string item;
    while (std::getline(in, item, ',')) q.push_back(std::stod(item));
  }
  for (const auto& n : lexnet::Knn(*table, q, a.k)) {
    if (g.machine()) {
      std::cout << stats::MachineLine("knn", n.word, n.distance) << '\n';
    } else {
      std::cout << std::left << std::setw(20) << n.word << n.distance << '\n';
    }
  }
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string corpus, checkpoint, lexicon_dir, store;
  std::size_t top_k = 5;
};

gateway::Resources LoadResources(const Globals& g, const std::string& corpus_path,
                                 const std::string& lexicon_dir, const std::string& checkpoint,
                                 std::size_t top_k) {
  gateway::Resources res;
  res.corpus = std::make_shared<const corpus::Corpus>(corpus::ParseCorpus(corpus_path, true).corpus);
  res.lexicon = std::make_shared<const corpus::TextLexicon>(
      corpus::TextLexicon::Load(lexicon_dir, res.corpus->Categories()));
  res.taxonomy = std::make_shared<const lexnet::Taxonomy>(lexnet::Taxonomy::Load(lexicon_dir));
  res.seed = g.seed;
  res.top_k = top_k;
  if (!checkpoint.empty()) {
    auto table = LoadTable(fs::path(lexicon_dir) / "embeddings.txt");
    auto model = gateway::ModelGuesser::FromCheckpoint(nn::LoadCheckpoint(checkpoint), table);
    res.features = model.feature_config();
    res.model = std::make_shared<const gateway::ModelGuesser>(std::move(model));
  }
  return res;
}

gateway::HttpServer* g_server = nullptr;

int RunServe(const Globals& g, const ServeArgs& a) {
  std::optional<fs::path> store;
  if (!a.store.empty()) store = a.store;
  gateway::SessionStore sessions(LoadResources(g, a.corpus, a.lexicon_dir, a.checkpoint, a.top_k),
                                 store);
  gateway::HttpServer server(sessions);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->Stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->Stop();
  });
  std::cerr << "listening on " << a.host << ':' << a.port << " (" << sessions.size()
            << " sessions replayed)\n";
  if (!server.Listen(a.host, a.port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + a.host + ":" + std::to_string(a.port));
  }
  return 0;
}

struct ExportArgs {
  std::string store, corpus, lexicon_dir, out, ratings_out, category;
};

int RunExport(const Globals& g, const ExportArgs& a) {
  gateway::SessionStore sessions(LoadResources(g, a.corpus, a.lexicon_dir, "", 5), fs::path(a.store));
  gateway::ExportFilter f;
  if (!a.category.empty()) f.category = a.category;
  auto bundle = sessions.Export(f);
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
    out << text;
  };
  write(a.out, bundle.corpus);
  if (!a.ratings_out.empty()) write(a.ratings_out, bundle.ratings);
  PrintStat(g, "export", "sessions", static_cast<double>(bundle.sessions));
  return 0;
}

struct TuringArgs {
  std::string ratings;
};

// Ratings lines as written by export: session<TAB>judge<TAB>type<TAB>value.
int RunTuring(const Globals& g, const TuringArgs& a) {
  std::map<std::string, eval::SequenceRatings> by_session;
  for (const auto& line : ReadLines(a.ratings)) {
    if (line.empty()) continue;
    auto cols = SplitTab(line);
    if (cols.size() != 4) throw Error(ErrorCode::kParse, "bad ratings line: " + line);
    auto& rec = by_session[cols[0]];
    rec.sequence_id = cols[0];
    int v = std::stoi(cols[3]);
    (gateway::ParseGuesserType(cols[2]) == gateway::GuesserType::kHuman ? rec.human : rec.model)
        .push_back(v);
  }
  std::vector<eval::SequenceRatings> records;
  for (auto& [id, r] : by_session) records.push_back(std::move(r));
  auto report = eval::BuildTuringReport(records);
  for (const auto& [v, n] : report.human_histogram) PrintStat(g, "rating_human", std::to_string(v), n);
  for (const auto& [v, n] : report.model_histogram) PrintStat(g, "rating_model", std::to_string(v), n);
  PrintStat(g, "wilcoxon", "n", static_cast<double>(report.wilcoxon.n_effective));
  PrintStat(g, "wilcoxon", "W", report.wilcoxon.w);
  PrintStat(g, "wilcoxon", "Z", report.wilcoxon.z);
  PrintStat(g, "wilcoxon", "p", report.wilcoxon.p);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sketch guessing corpus, models and game server"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for splits, session selection and training")
      ->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "machine"}));

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Normalize raw guess sequences");
  c_pre->add_option("--in", pre.in, "Raw corpus")->required();
  c_pre->add_option("--out", pre.out, "Normalized corpus")->required();
  c_pre->add_option("--lexicon-dir", pre.lexicon_dir, "Lexicon directory")->required();
  c_pre->add_flag("--strict", pre.strict, "Fail on malformed lines instead of skipping");

  SplitArgs sp;
  auto* c_split = app.add_subcommand("split", "Seeded train/val/test split");
  c_split->add_option("--in", sp.in)->required();
  c_split->add_option("--out-dir", sp.out_dir)->required();
  c_split->add_option("--ratios", sp.ratios)->delimiter(',')->expected(3);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Corpus statistics");
  c_an->add_option("--in", an.in)->required();
  c_an->add_option("--lexicon-dir", an.lexicon_dir, "Enables final-guess accuracy");
  c_an->add_option("--compare", an.compare, "Second guesser's corpus for Cohen's d");
  c_an->add_option("--criteria", an.criteria);
  c_an->add_option("--z", an.z, "Wilson interval z");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train from a manifest");
  c_tr->add_option("--manifest", tr.manifest)->required();
  c_tr->add_option("--model", tr.model)->check(CLI::IsMember({"unified", "two-phase"}));

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  c_ev->add_option("--checkpoint", ev.checkpoint)->required();
  c_ev->add_option("--corpus", ev.corpus)->required();
  c_ev->add_option("--lexicon-dir", ev.lexicon_dir);
  c_ev->add_option("--embeddings", ev.embeddings);
  c_ev->add_option("--features", ev.features, "Precomputed feature file");
  c_ev->add_option("--mode", ev.mode)->check(CLI::IsMember({"guess-portion", "full"}));
  c_ev->add_option("--k", ev.k);
  auto* delta_opt = c_ev->add_option("--delta", ev.delta);
  c_ev->add_option("--window", ev.window, "Window widths 1,3,5 instead of --delta")->excludes(delta_opt);
  c_ev->add_flag("--exclude-no-guess", ev.exclude_no_guess, "Drop \"#\" from retrieval");
  c_ev->add_flag("--step-weighted", ev.step_weighted, "Average over steps (diagnostic)");

  MatchArgs ma;
  auto* c_ma = app.add_subcommand("match", "Score guess<TAB>truth lines");
  c_ma->add_option("--input", ma.input)->required();
  c_ma->add_option("--lexicon-dir", ma.lexicon_dir)->required();
  c_ma->add_option("--criteria", ma.criteria);
  c_ma->add_option("--chain", ma.chain, "Comma-separated inclusion chain, e.g. EM,EM|SUB");
  c_ma->add_option("--wup-threshold", ma.wup_threshold);

  KnnArgs kn;
  auto* c_kn = app.add_subcommand("knn", "Nearest embedding neighbours");
  c_kn->add_option("--embeddings", kn.embeddings);
  c_kn->add_option("--lexicon-dir", kn.lexicon_dir);
  c_kn->add_option("--word", kn.word);
  c_kn->add_option("--vector", kn.vector, "Comma-separated query vector");
  c_kn->add_option("--k", kn.k);

  ServeArgs se;
  auto* c_se = app.add_subcommand("serve", "Run the HTTP game server");
  c_se->add_option("--host", se.host);
  c_se->add_option("--port", se.port);
  c_se->add_option("--corpus", se.corpus)->required();
  c_se->add_option("--checkpoint", se.checkpoint);
  c_se->add_option("--lexicon-dir", se.lexicon_dir)->required();
  c_se->add_option("--store", se.store, "Append-only session log");
  c_se->add_option("--top-k", se.top_k);

  ExportArgs ex;
  auto* c_ex = app.add_subcommand("export", "Export revealed sessions from a session log");
  c_ex->add_option("--store", ex.store)->required();
  c_ex->add_option("--corpus", ex.corpus)->required();
  c_ex->add_option("--lexicon-dir", ex.lexicon_dir)->required();
  c_ex->add_option("--out", ex.out)->required();
  c_ex->add_option("--ratings-out", ex.ratings_out);
  c_ex->add_option("--category", ex.category);

  TuringArgs tu;
  auto* c_tu = app.add_subcommand("turing", "Rating report with Wilcoxon test");
  c_tu->add_option("--ratings", tu.ratings)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_pre) return RunPreprocess(g, pre);
    if (*c_split) return RunSplit(g, sp);
    if (*c_an) return RunAnalyze(g, an);
    if (*c_tr) return RunTrain(g, tr);
    if (*c_ev) return RunEval(g, ev);
    if (*c_ma) return RunMatch(g, ma);
    if (*c_kn) return RunKnn(g, kn);
    if (*c_se) return RunServe(g, se);
    if (*c_ex) return RunExport(g, ex);
    if (*c_tu) return RunTuring(g, tu);
  } catch (const Error& e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
