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
#include <numbers>
#include <random>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/lexnet.hpp"

namespace sketchguess::lexnet {

namespace {

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Uniform in (0,1) from the top 53 bits; avoids implementation-defined
// standard distributions so the "#" vector is the same everywhere.
double Uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::vector<double> SeededUnitVector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double u1 = Uniform01(rng), u2 = Uniform01(rng);
    v[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double n = Norm(v);
  for (double& x : v) x /= n;
  return v;
}

EmbeddingTable::EmbeddingTable(std::size_t dim,
                               std::vector<std::pair<std::string, std::vector<double>>> entries,
                               std::uint64_t no_guess_seed)
    : dim_(dim), seed_(no_guess_seed) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  bool has_no_guess = false;
  for (const auto& [w, v] : entries) has_no_guess |= (w == kNoGuessToken);
  if (!has_no_guess) {
    entries.emplace_back(std::string(kNoGuessToken), SeededUnitVector(dim, no_guess_seed));
  }
  words_.reserve(entries.size());
  data_.reserve(entries.size() * dim);
  unit_.reserve(entries.size() * dim);
  for (auto& [w, v] : entries) {
    if (v.size() != dim) {
      throw Error(ErrorCode::kParse, "embedding for '" + w + "' has " + std::to_string(v.size()) +
                                         " values, expected " + std::to_string(dim));
    }
    double n = Norm(v);
    if (!std::isfinite(n) || n == 0.0) {
      throw Error(ErrorCode::kParse, "embedding for '" + w + "' is zero or non-finite");
    }
    if (!index_.emplace(w, words_.size()).second) {
      throw Error(ErrorCode::kParse, "duplicate embedding word '" + w + "'");
    }
    words_.push_back(w);
    data_.insert(data_.end(), v.begin(), v.end());
    for (double x : v) unit_.push_back(x / n);
  }
}

EmbeddingTable EmbeddingTable::Parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "empty embedding file");
  std::istringstream header(line);
  std::size_t vocab = 0, dim = 0;
  std::uint64_t seed = kDefaultNoGuessSeed;
  if (!(header >> vocab >> dim)) throw Error(ErrorCode::kParse, "bad embedding header: " + line);
  header >> seed;

  std::vector<std::pair<std::string, std::vector<double>>> entries;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::string word;
    row >> word;
    std::vector<double> v;
    double x;
    while (row >> x) v.push_back(x);
    if (!row.eof()) throw Error(ErrorCode::kParse, "non-numeric value in row for '" + word + "'");
    if (v.size() != dim) {
      throw Error(ErrorCode::kParse, "dimension mismatch for '" + word + "': got " +
                                         std::to_string(v.size()) + ", expected " +
                                         std::to_string(dim));
    }
    entries.emplace_back(std::move(word), std::move(v));
  }
  if (entries.size() != vocab) {
    throw Error(ErrorCode::kParse, "header declares " + std::to_string(vocab) + " words, found " +
                                       std::to_string(entries.size()));
  }
  return EmbeddingTable(dim, std::move(entries), seed);
}

EmbeddingTable EmbeddingTable::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embedding file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

std::string EmbeddingTable::Format() const {
  std::ostringstream out;
  out.precision(17);
  out << words_.size() << ' ' << dim_ << ' ' << seed_ << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i];
    for (double x : Vector(i)) out << ' ' << x;
    out << '\n';
  }
  return out.str();
}

bool EmbeddingTable::Contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::optional<std::size_t> EmbeddingTable::IndexOf(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> EmbeddingTable::Vector(std::size_t i) const {
  return {data_.data() + i * dim_, dim_};
}

std::span<const double> EmbeddingTable::UnitVector(std::size_t i) const {
  return {unit_.data() + i * dim_, dim_};
}

std::span<const double> EmbeddingTable::Vector(std::string_view word) const {
  auto i = IndexOf(word);
  if (!i) throw Error(ErrorCode::kNotFound, "word not in embedding table: " + std::string(word));
  return Vector(*i);
}

std::vector<Neighbor> Knn(const EmbeddingTable& table, std::span<const double> query,
                          std::size_t k) {
  if (query.size() != table.dim()) {
    throw Error(ErrorCode::kInvalidArgument, "query dimension does not match table");
  }
  if (k == 0 || k > table.size()) {
    throw Error(ErrorCode::kInvalidArgument, "k must be in [1, table size]");
  }
  double qn = Norm(query);
  if (!(qn > 0.0) || !std::isfinite(qn)) {
    throw Error(ErrorCode::kInvalidArgument, "query vector has zero or non-finite norm");
  }
  std::vector<std::pair<double, std::size_t>> scored(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto u = table.UnitVector(i);
    double dot = 0.0;
    for (std::size_t d = 0; d < query.size(); ++d) dot += query[d] * u[d];
    scored[i] = {1.0 - dot / qn, i};
  }
  auto less = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return table.Word(a.second) < table.Word(b.second);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), less);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back({table.Word(scored[i].second), scored[i].first});
  }
  return out;
}

}  // namespace sketchguess::lexnet
