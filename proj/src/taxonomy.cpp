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
#include <fstream>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/lexnet.hpp"

namespace sketchguess::lexnet {

namespace {

std::string ReadFile(const std::filesystem::path& path, bool required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (required) throw Error(ErrorCode::kIo, "cannot open " + path.string());
    return {};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> TabRows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      std::size_t end = line.find('\t', pos);
      cols.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
      if (end == std::string::npos) break;
      pos = end + 1;
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace

std::size_t Taxonomy::AddNode(const std::string& word) {
  auto [it, inserted] = index_.emplace(word, names_.size());
  if (inserted) {
    names_.push_back(word);
    parent_.push_back(std::nullopt);
  }
  return it->second;
}

std::size_t Taxonomy::Require(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "word not in taxonomy: " + std::string(word));
  }
  return it->second;
}

void Taxonomy::AddEdge(const std::string& child, const std::string& parent) {
  if (child == parent) throw Error(ErrorCode::kInvalidArgument, "self loop at " + child);
  if (child == root_) throw Error(ErrorCode::kInvalidArgument, "root cannot have a parent");
  std::size_t c = AddNode(child);
  std::size_t p = AddNode(parent);
  if (parent_[c] && *parent_[c] != p) {
    throw Error(ErrorCode::kInvalidArgument, "second parent for " + child);
  }
  for (std::optional<std::size_t> cur = p; cur; cur = parent_[*cur]) {
    if (*cur == c) throw Error(ErrorCode::kInvalidArgument, "cycle through " + child);
  }
  parent_[c] = p;
}

void Taxonomy::AddSynset(const std::vector<std::string>& words) {
  std::size_t id = synset_count_++;
  for (const auto& w : words) {
    AddNode(w);
    auto& ids = synsets_of_[w];
    if (ids.empty() || ids.back() != id) ids.push_back(id);
  }
}

Taxonomy Taxonomy::Parse(std::string_view edges, std::string_view synsets, std::string root) {
  Taxonomy t(std::move(root));
  for (const auto& row : TabRows(edges)) {
    if (row.size() != 2) throw Error(ErrorCode::kParse, "taxonomy line needs child<TAB>parent");
    t.AddEdge(row[0], row[1]);
  }
  for (const auto& row : TabRows(synsets)) t.AddSynset(row);
  return t;
}

Taxonomy Taxonomy::Load(const std::filesystem::path& dir, std::string root) {
  return Parse(ReadFile(dir / "taxonomy.tsv", true), ReadFile(dir / "synsets.tsv", false),
               std::move(root));
}

bool Taxonomy::Contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::optional<std::string> Taxonomy::Parent(std::string_view word) const {
  std::size_t i = Require(word);
  if (names_[i] == root_) return std::nullopt;
  if (parent_[i]) return names_[*parent_[i]];
  return root_;
}

int Taxonomy::Depth(std::string_view word) const {
  std::size_t i = Require(word);
  int depth = 1;
  std::optional<std::size_t> cur = i;
  while (names_[*cur] != root_) {
    ++depth;
    cur = parent_[*cur];
    if (!cur) break;  // parentless node: its parent is the root
  }
  return depth;
}

std::string Taxonomy::LowestCommonAncestor(std::string_view a, std::string_view b) const {
  std::string x(a), y(b);
  int dx = Depth(x), dy = Depth(y);
  while (dx > dy) {
    x = *Parent(x);
    --dx;
  }
  while (dy > dx) {
    y = *Parent(y);
    --dy;
  }
  while (x != y) {
    x = *Parent(x);
    y = *Parent(y);
  }
  return x;
}

bool Taxonomy::AreSynonyms(std::string_view a, std::string_view b) const {
  if (a == b) return Contains(a);
  auto ia = synsets_of_.find(std::string(a));
  auto ib = synsets_of_.find(std::string(b));
  if (ia == synsets_of_.end() || ib == synsets_of_.end()) return false;
  for (std::size_t id : ia->second) {
    if (std::find(ib->second.begin(), ib->second.end(), id) != ib->second.end()) return true;
  }
  return false;
}

std::vector<std::string> Taxonomy::Nodes() const { return names_; }

double WupSimilarity(const Taxonomy& taxonomy, std::string_view a, std::string_view b) {
  std::string lcs = taxonomy.LowestCommonAncestor(a, b);
  double num = 2.0 * taxonomy.Depth(lcs);
  return num / static_cast<double>(taxonomy.Depth(a) + taxonomy.Depth(b));
}

}  // namespace sketchguess::lexnet
