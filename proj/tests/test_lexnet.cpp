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
#include <random>
#include <sstream>

#include "doctest.h"
#include "sketchguess/error.hpp"
#include "sketchguess/lexnet.hpp"
#include "test_support.hpp"

using namespace sketchguess;
using namespace sketchguess::lexnet;
using sketchguess::testing::ReadText;
using sketchguess::testing::SourcePath;

namespace {

double NormOf(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Random forest over n nodes as parent indices (-1 = hangs off the root).
struct Forest {
  std::vector<int> parent;
  std::string Name(int i) const { return "n" + std::to_string(i); }
  Taxonomy Build() const {
    Taxonomy t("root");
    for (std::size_t i = 0; i < parent.size(); ++i) {
      std::string child = Name(static_cast<int>(i));
      t.AddEdge(child, parent[i] < 0 ? std::string("root") : Name(parent[i]));
    }
    return t;
  }
  // Path from node to the root, inclusive at both ends ("root" as -1).
  std::vector<int> Path(int i) const {
    std::vector<int> p{i};
    while (i >= 0) p.push_back(i = parent[static_cast<std::size_t>(i)]);
    return p;
  }
};

Forest RandomForest(std::mt19937_64& rng, int n) {
  Forest f;
  for (int i = 0; i < n; ++i) {
    // Parents always precede children so the graph is acyclic.
    f.parent.push_back(i == 0 || rng() % 4 == 0 ? -1 : static_cast<int>(rng() % i));
  }
  return f;
}

double WupOracle(const Forest& f, int a, int b) {
  auto pa = f.Path(a), pb = f.Path(b);
  // Deepest common ancestor: the first node of a's path that is on b's path.
  for (std::size_t i = 0; i < pa.size(); ++i) {
    auto it = std::find(pb.begin(), pb.end(), pa[i]);
    if (it != pb.end()) {
      double depth_lcs = static_cast<double>(pa.size() - i);
      return 2.0 * depth_lcs / static_cast<double>(pa.size() + pb.size());
    }
  }
  return 0.0;
}

Taxonomy Lexicon() { return Taxonomy::Load(SourcePath("data/lexicon")); }

}  // namespace

TEST_CASE("embedding file parsing") {
  auto t = EmbeddingTable::Parse("3 2\na 1 0\nb 0 1\n# 0.5 0.5\n");
  CHECK(t.size() == 3);
  CHECK(t.dim() == 2);
  CHECK(t.Vector("#")[0] == 0.5);
  CHECK_THROWS_AS(EmbeddingTable::Parse("2 2\na 1 0\nb 0 1 2\n"), Error);
  CHECK_THROWS_AS(EmbeddingTable::Parse(""), Error);
  CHECK_THROWS_AS(EmbeddingTable::Parse("2 2\na 1 0\na 0 1\n"), Error);
  CHECK_THROWS_AS(EmbeddingTable::Parse("1 2\na 0 0\n"), Error);
  CHECK_THROWS_AS(EmbeddingTable::Load("/nonexistent/emb.txt"), Error);
}

TEST_CASE("missing no-guess vector is synthesized from the seed") {
  auto t = EmbeddingTable::Parse("2 3 42\na 1 0 0\nb 0 1 0\n");
  CHECK(t.size() == 3);
  CHECK(t.no_guess_seed() == 42);
  CHECK(NormOf(t.NoGuessVector()) == doctest::Approx(1.0).epsilon(1e-9));
  auto again = EmbeddingTable::Parse("2 3 42\na 1 0 0\nb 0 1 0\n");
  CHECK(std::equal(t.NoGuessVector().begin(), t.NoGuessVector().end(),
                   again.NoGuessVector().begin()));
  auto other = EmbeddingTable::Parse("2 3 43\na 1 0 0\nb 0 1 0\n");
  CHECK(!std::equal(t.NoGuessVector().begin(), t.NoGuessVector().end(),
                    other.NoGuessVector().begin()));
  // Formatting keeps the seed and the synthesized row.
  auto round = EmbeddingTable::Parse(t.Format());
  CHECK(round.size() == 3);
  CHECK(round.Format() == t.Format());
}

TEST_CASE("knn examples") {
  auto table = EmbeddingTable::Load(SourcePath("data/lexicon/embeddings.txt"));
  auto cat = table.Vector("cat");
  auto self = Knn(table, cat, 3);
  CHECK(self[0].word == "cat");
  CHECK(self[0].distance == doctest::Approx(0.0).epsilon(1e-12));

  const double r = 1.0 / std::sqrt(2.0);
  EmbeddingTable abc(2, {{"a", {1, 0}}, {"b", {0, 1}}, {"c", {r, r}}, {"#", {-1, 0}}});
  std::vector<double> q{1, 0.1};
  auto top = Knn(abc, q, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].word == "a");
  CHECK(top[1].word == "c");

  EmbeddingTable twins(2, {{"zeta", {1, 1}}, {"alpha", {2, 2}}, {"#", {-1, 0}}});
  std::vector<double> q2{1, 1};
  CHECK(Knn(twins, q2, 1)[0].word == "alpha");

  std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(Knn(abc, zero, 1), Error);
  CHECK_THROWS_AS(Knn(abc, q, 5), Error);
  CHECK_THROWS_AS(Knn(abc, q, 0), Error);
}

TEST_CASE("knn agrees with an exhaustive scan") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 10 + rng() % 990, dim = 2 + rng() % 16;
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (double& x : v) x = g(rng);
      rows.emplace_back("w" + std::to_string(rng()), v);
    }
    EmbeddingTable table(dim, rows);
    std::vector<double> q(dim);
    for (double& x : q) x = g(rng);

    std::vector<std::pair<double, std::string>> all;
    for (std::size_t i = 0; i < table.size(); ++i) {
      auto e = table.Vector(i);
      double dot = 0;
      for (std::size_t d = 0; d < dim; ++d) dot += q[d] * e[d];
      all.emplace_back(1.0 - dot / (NormOf(q) * NormOf(e)), table.Word(i));
    }
    std::sort(all.begin(), all.end());
    std::size_t k = 1 + rng() % std::min<std::size_t>(20, table.size());
    auto got = Knn(table, q, k);
    REQUIRE(got.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(got[i].word == all[i].second);
      CHECK(got[i].distance == doctest::Approx(all[i].first).epsilon(1e-12));
    }
    CHECK(Knn(table, q, k) == got);
  }
}

TEST_CASE("wup examples") {
  Taxonomy chain("root");
  chain.AddEdge("a", "root");
  chain.AddEdge("b", "a");
  chain.AddEdge("c", "b");
  CHECK(chain.Depth("c") == 4);
  CHECK(WupSimilarity(chain, "b", "c") == doctest::Approx(6.0 / 7.0));
  CHECK(WupSimilarity(chain, "c", "c") == 1.0);

  Taxonomy sib("root");
  sib.AddEdge("a", "root");
  sib.AddEdge("b1", "a");
  sib.AddEdge("b2", "a");
  CHECK(WupSimilarity(sib, "b1", "b2") == doctest::Approx(4.0 / 6.0));
  CHECK_THROWS_AS(WupSimilarity(sib, "b1", "nope"), Error);
}

TEST_CASE("taxonomy rejects cycles and second parents") {
  Taxonomy t("root");
  t.AddEdge("a", "root");
  t.AddEdge("b", "a");
  CHECK_THROWS_AS(t.AddEdge("a", "b"), Error);
  CHECK_THROWS_AS(t.AddEdge("b", "root"), Error);
  CHECK_THROWS_AS(t.AddEdge("x", "x"), Error);
  CHECK_THROWS_AS(Taxonomy::Parse("a\n", ""), Error);
}

TEST_CASE("wup matches path enumeration on random forests") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Forest f = RandomForest(rng, 2 + static_cast<int>(rng() % 40));
    Taxonomy t = f.Build();
    int n = static_cast<int>(f.parent.size());
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double w = WupSimilarity(t, f.Name(a), f.Name(b));
        REQUIRE(w == doctest::Approx(WupOracle(f, a, b)).epsilon(1e-12));
        REQUIRE(w == WupSimilarity(t, f.Name(b), f.Name(a)));
        REQUIRE(w > 0.0);
        REQUIRE(w <= 1.0);
      }
      REQUIRE(WupSimilarity(t, f.Name(a), f.Name(a)) == 1.0);
      REQUIRE(t.Depth(f.Name(a)) == static_cast<int>(f.Path(a).size()));
    }
  }
}

TEST_CASE("match examples") {
  Taxonomy t = Lexicon();
  auto em = Match("rainbow", "rainbow", t, CriteriaSet{Criterion::kEM});
  CHECK(em.verdict);
  CHECK(em.fired == CriteriaSet{Criterion::kEM});

  auto sub = Match("pot gold end rainbow", "rainbow", t, CriteriaSet{Criterion::kSUB});
  CHECK(sub.verdict);
  CHECK(sub.fired == CriteriaSet{Criterion::kSUB});

  CriteriaSet five{Criterion::kEM, Criterion::kSUB, Criterion::kSYN, Criterion::kHY,
                   Criterion::kHYPC};
  auto gun = Match("firearm", "revolver", t, five);
  CHECK(gun.verdict);
  CHECK(gun.fired == CriteriaSet{Criterion::kHYPC});

  // SUB is token containment, not substring.
  CHECK(!SubsetMatch("cat", "category"));
  CHECK(SubsetMatch("ice-cream", "cream"));

  // Out-of-taxonomy words fail quietly.
  auto oov = Match("qwerty", "revolver", t, five);
  CHECK(!oov.verdict);
}

TEST_CASE("criteria fixture") {
  Taxonomy t = Lexicon();
  CriteriaSet all = CriteriaSet::Parse("EM|SUB|SYN|HY|HY-PC|WUP", 0.9);
  std::istringstream in(ReadText(SourcePath("tests/fixtures/criteria25.tsv")));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto a = line.find('\t'), b = line.find('\t', a + 1);
    std::string guess = line.substr(0, a), truth = line.substr(a + 1, b - a - 1);
    std::string expected = line.substr(b + 1);
    if (expected == "-") expected.clear();
    auto r = Match(guess, truth, t, all);
    INFO(guess, " / ", truth);
    CHECK(r.fired.ToString() == expected);
    CHECK(r.verdict == !expected.empty());
    ++rows;
  }
  CHECK(rows == 25);
}

TEST_CASE("criteria are monotone under set inclusion") {
  Taxonomy t = Lexicon();
  auto nodes = t.Nodes();
  nodes.push_back("not a word");
  std::mt19937_64 rng(1000);
  auto pick = [&] {
    std::string w = nodes[rng() % nodes.size()];
    if (rng() % 5 == 0) w += " " + nodes[rng() % nodes.size()];
    return w;
  };
  for (int i = 0; i < 1000; ++i) {
    std::string g = pick(), tr = pick();
    CriteriaSet a, b;
    a.bits = static_cast<std::uint8_t>(rng() % 64);
    b.bits = static_cast<std::uint8_t>(a.bits | (rng() % 64));
    auto ra = Match(g, tr, t, a), rb = Match(g, tr, t, b);
    if (ra.verdict) REQUIRE(rb.verdict);
    CriteriaSet restricted;
    restricted.bits = rb.fired.bits & a.bits;
    REQUIRE(ra.fired.bits == restricted.bits);
    // EM implies SUB implies a verdict whenever SUB is on.
    auto full = Match(g, tr, t, CriteriaSet{Criterion::kEM, Criterion::kSUB});
    if (full.fired.Has(Criterion::kEM)) REQUIRE(full.fired.Has(Criterion::kSUB));
  }
}

TEST_CASE("accuracy by criteria") {
  Taxonomy t = Lexicon();
  std::vector<CriteriaSet> chain{CriteriaSet{Criterion::kEM},
                                 CriteriaSet{Criterion::kEM, Criterion::kSUB},
                                 CriteriaSet::Default()};
  std::vector<std::pair<std::string, std::string>> exact{{"cat", "cat"}, {"dog", "dog"}};
  for (double a : AccuracyByCriteria(exact, t, chain)) CHECK(a == 1.0);

  std::vector<std::pair<std::string, std::string>> four{
      {"cat", "cat"}, {"dog", "dog"}, {"pot gold end rainbow", "rainbow"}, {"fire truck", "truck"}};
  auto acc = AccuracyByCriteria(four, t, chain);
  CHECK(acc[0] == 0.5);
  CHECK(acc[1] == 1.0);

  CHECK_THROWS_AS(AccuracyByCriteria({}, t, chain), Error);
  CHECK_THROWS_AS(AccuracyByCriteria(exact, t, {CriteriaSet{Criterion::kSUB},
                                                  CriteriaSet{Criterion::kEM}}),
                  Error);
  CHECK(CriteriaSet::Parse("EM|SUB|SYN") == CriteriaSet::Default());
  CHECK_THROWS_AS(CriteriaSet::Parse("EM|XX"), Error);
}
