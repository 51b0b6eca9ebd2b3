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
#include <limits>
#include <sstream>

#include "sketchguess/corpus.hpp"
#include "sketchguess/error.hpp"

namespace sketchguess::corpus {

namespace {

std::string ReadFileIfExists(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find('\t', pos);
    out.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string Join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

SpellDictionary::SpellDictionary(std::set<std::string> words) : words_(std::move(words)) {}

PosDictionary ParsePosDictionary(std::string_view text) {
  PosDictionary pos;
  for (const std::string& line : SplitLines(text)) {
    if (line.empty()) continue;
    auto cols = SplitTabs(line);
    if (cols.size() != 2) throw Error(ErrorCode::kParse, "bad POS line: " + line);
    PosTag tag;
    if (cols[1] == "NOUN") {
      tag = PosTag::kNoun;
    } else if (cols[1] == "OTHER") {
      tag = PosTag::kOther;
    } else {
      throw Error(ErrorCode::kParse, "unknown POS tag: " + cols[1]);
    }
    pos[ToLower(cols[0])] = tag;
  }
  return pos;
}

std::map<std::string, std::string> ParsePluralMap(std::string_view text) {
  std::map<std::string, std::string> plurals;
  for (const std::string& line : SplitLines(text)) {
    if (line.empty()) continue;
    auto cols = SplitTabs(line);
    if (cols.size() != 2) throw Error(ErrorCode::kParse, "bad plural line: " + line);
    plurals[cols[0]] = cols[1];
  }
  return plurals;
}

TextLexicon TextLexicon::Load(const std::filesystem::path& dir,
                              const std::set<std::string>& categories) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "lexicon directory not found: " + dir.string());
  }
  TextLexicon lex;
  for (const std::string& line : SplitLines(ReadFileIfExists(dir / "words.txt"))) {
    if (!line.empty()) lex.spelling.Add(ToLower(line));
  }
  lex.pos = ParsePosDictionary(ReadFileIfExists(dir / "pos.tsv"));
  lex.plurals = ParsePluralMap(ReadFileIfExists(dir / "plurals.tsv"));
  for (const std::string& line : SplitLines(ReadFileIfExists(dir / "synsets.tsv"))) {
    if (line.empty()) continue;
    auto words = SplitTabs(line);
    for (const auto& w : words) {
      auto& syn = lex.synonyms[w];
      for (const auto& other : words) {
        if (other != w && std::find(syn.begin(), syn.end(), other) == syn.end()) {
          syn.push_back(other);
        }
      }
    }
  }
  // Every tagged word must survive spelling untouched, otherwise noun
  // extraction and spelling disagree on a second pass.
  for (const auto& [word, tag] : lex.pos) lex.spelling.Add(word);
  for (const auto& c : categories) lex.spelling.Add(c);
  return lex;
}

std::string ToLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view phrase) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : phrase) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::size_t Levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string SpellCorrect(const std::string& word, const SpellDictionary& dictionary) {
  if (dictionary.empty()) throw Error(ErrorCode::kFailedPrecondition, "empty spell dictionary");
  if (word.empty() || dictionary.Contains(word)) return word;
  constexpr std::size_t kMaxDistance = 2;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  const std::string* best_word = nullptr;
  // std::set iterates lexicographically, so the first minimum wins ties.
  for (const std::string& candidate : dictionary.words()) {
    std::size_t lo = candidate.size() > word.size() ? candidate.size() - word.size()
                                                    : word.size() - candidate.size();
    if (lo > kMaxDistance || lo >= best) continue;
    std::size_t d = Levenshtein(word, candidate);
    if (d < best) {
      best = d;
      best_word = &candidate;
    }
  }
  if (best_word == nullptr || best > kMaxDistance) return word;
  return *best_word;
}

std::string ExtractNouns(std::string_view phrase, const PosDictionary& pos,
                         const SpellDictionary* spelling) {
  auto tokens = Tokenize(phrase);
  auto is_noun = [&](const std::string& token) {
    auto it = pos.find(token);
    if (it != pos.end()) return it->second == PosTag::kNoun;
    if (spelling != nullptr && !spelling->empty()) {
      auto jt = pos.find(SpellCorrect(token, *spelling));
      return jt != pos.end() && jt->second == PosTag::kNoun;
    }
    return false;
  };
  std::vector<std::string> nouns;
  for (const auto& t : tokens) {
    if (is_noun(t)) nouns.push_back(t);
  }
  if (nouns.empty()) return Join(tokens);
  return Join(nouns);
}

namespace {

std::string NormalizeGuess(const std::string& raw, const TextLexicon& lex) {
  std::string lowered = ToLower(raw);
  if (Tokenize(lowered).empty()) return "";
  std::string nouns = ExtractNouns(lowered, lex.pos, &lex.spelling);
  std::vector<std::string> tokens = Tokenize(nouns);
  if (!lex.spelling.empty()) {
    for (auto& t : tokens) t = SpellCorrect(t, lex.spelling);
  }
  return Join(tokens);
}

}  // namespace

PreprocessOutcome PreprocessGuessSequence(const GuessSequence& sequence,
                                          const TextLexicon& lexicon) {
  GuessSequence out{sequence.sketch_id, sequence.subject_id, {}};
  out.guesses.reserve(sequence.size());
  std::string last;
  bool any = false;
  for (const std::string& raw : sequence.guesses) {
    std::string g = NormalizeGuess(raw, lexicon);
    if (g.empty()) {
      g = last;
    } else {
      last = g;
      any = true;
    }
    out.guesses.push_back(std::move(g));
  }
  if (!any) return Removed{};
  return out;
}

Corpus PreprocessCorpus(const Corpus& raw, const TextLexicon& lexicon, PreprocessStats* stats) {
  Corpus out;
  PreprocessStats local;
  for (const Record& r : raw.records) {
    ++local.input;
    auto outcome = PreprocessGuessSequence(r.guesses, lexicon);
    if (auto* g = std::get_if<GuessSequence>(&outcome)) {
      out.records.push_back(Record{r.sketch, std::move(*g)});
    } else {
      ++local.removed;
    }
  }
  if (stats != nullptr) *stats = local;
  return out;
}

std::vector<GuessSequence> AugmentGuesses(const GuessSequence& sequence,
                                          const TextLexicon& lexicon) {
  std::vector<GuessSequence> variants{sequence};
  auto push_unique = [&](GuessSequence v) {
    if (std::find(variants.begin(), variants.end(), v) == variants.end()) {
      variants.push_back(std::move(v));
    }
  };

  GuessSequence plural = sequence;
  for (auto& g : plural.guesses) {
    if (auto it = lexicon.plurals.find(g); it != lexicon.plurals.end()) g = it->second;
  }
  push_unique(std::move(plural));

  std::size_t schemes = 0;
  for (const auto& g : sequence.guesses) {
    if (auto it = lexicon.synonyms.find(g); it != lexicon.synonyms.end()) {
      schemes = std::max(schemes, it->second.size());
    }
  }
  for (std::size_t j = 0; j < schemes; ++j) {
    GuessSequence v = sequence;
    for (auto& g : v.guesses) {
      auto it = lexicon.synonyms.find(g);
      if (it != lexicon.synonyms.end() && j < it->second.size()) g = it->second[j];
    }
    push_unique(std::move(v));
  }
  return variants;
}

}  // namespace sketchguess::corpus
