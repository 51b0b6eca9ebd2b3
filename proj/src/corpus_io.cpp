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

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sketchguess/corpus.hpp"
#include "sketchguess/error.hpp"

namespace sketchguess::corpus {

using nlohmann::json;

StrokeSequence StrokeSequence::Prefix(std::size_t t) const {
  StrokeSequence out{sketch_id, category, {}};
  t = std::min(t, strokes.size());
  out.strokes.assign(strokes.begin(), strokes.begin() + static_cast<std::ptrdiff_t>(t));
  return out;
}

std::set<std::string> Corpus::Categories() const {
  std::set<std::string> out;
  for (const auto& r : records) out.insert(r.sketch.category);
  return out;
}

namespace {

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kParse, "malformed record: " + what);
}

const json& Field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) Malformed(std::string("missing field '") + name + "'");
  return *it;
}

std::string StringField(const json& obj, const char* name) {
  const json& v = Field(obj, name);
  if (!v.is_string()) Malformed(std::string("field '") + name + "' is not a string");
  return v.get<std::string>();
}

Stroke ParseStroke(const json& j) {
  if (!j.is_array() || j.empty()) Malformed("stroke must be a non-empty array");
  Stroke s;
  s.points.reserve(j.size());
  for (const json& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      Malformed("point must be an [x,y] number pair");
    }
    Point pt{p[0].get<double>(), p[1].get<double>()};
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y) || pt.x < 0.0 || pt.x > 1.0 ||
        pt.y < 0.0 || pt.y > 1.0) {
      Malformed("coordinate outside [0,1]");
    }
    s.points.push_back(pt);
  }
  return s;
}

}  // namespace

Record ParseRecordLine(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) Malformed("not a JSON object");

  Record r;
  r.sketch.sketch_id = StringField(j, "id");
  r.guesses.sketch_id = r.sketch.sketch_id;
  r.sketch.category = StringField(j, "category");
  r.guesses.subject_id = StringField(j, "subject");
  if (r.sketch.category.empty()) Malformed("empty category");
  for (char c : r.sketch.category) {
    if (c >= 'A' && c <= 'Z') Malformed("category must be lowercase");
  }

  const json& strokes = Field(j, "strokes");
  if (!strokes.is_array() || strokes.empty()) Malformed("strokes must be a non-empty array");
  for (const json& s : strokes) r.sketch.strokes.push_back(ParseStroke(s));

  const json& guesses = Field(j, "guesses");
  if (!guesses.is_array()) Malformed("guesses must be an array");
  for (const json& g : guesses) {
    if (!g.is_string()) Malformed("guess must be a string");
    r.guesses.guesses.push_back(g.get<std::string>());
  }
  if (r.guesses.guesses.size() != r.sketch.strokes.size()) {
    throw Error(ErrorCode::kParse,
                "length mismatch: " + std::to_string(r.sketch.strokes.size()) +
                    " strokes but " + std::to_string(r.guesses.guesses.size()) +
                    " guesses in record '" + r.sketch.sketch_id + "'");
  }
  return r;
}

ParseResult ParseCorpusText(std::string_view text, bool strict) {
  ParseResult out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    try {
      out.corpus.records.push_back(ParseRecordLine(line));
    } catch (const Error& e) {
      if (strict) {
        throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      }
      ++out.skipped;
    }
    if (end == text.size()) break;
  }
  return out;
}

ParseResult ParseCorpus(const std::filesystem::path& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCorpusText(buf.str(), strict);
}

Stroke ParseStrokeJson(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) Malformed("stroke is not JSON");
  return ParseStroke(j);
}

std::string FormatRecordLine(const Record& r) {
  json strokes = json::array();
  for (const Stroke& s : r.sketch.strokes) {
    json pts = json::array();
    for (const Point& p : s.points) pts.push_back(json::array({p.x, p.y}));
    strokes.push_back(std::move(pts));
  }
  json j;
  j["id"] = r.sketch.sketch_id;
  j["category"] = r.sketch.category;
  j["subject"] = r.guesses.subject_id;
  j["strokes"] = std::move(strokes);
  j["guesses"] = r.guesses.guesses;
  return j.dump();
}

std::string FormatCorpus(const Corpus& corpus) {
  std::string out;
  for (const Record& r : corpus.records) {
    out += FormatRecordLine(r);
    out += '\n';
  }
  return out;
}

void WriteCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write corpus file: " + path.string());
  out << FormatCorpus(corpus);
}

// ---------------------------------------------------------------------------

FeatureFile FeatureFile::Parse(std::string_view text) {
  FeatureFile ff;
  std::istringstream in{std::string(text)};
  std::string line;
  auto next_nonblank = [&](std::string& l) {
    while (std::getline(in, l)) {
      if (l.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  while (next_nonblank(line)) {
    std::istringstream header(line);
    std::string id;
    std::size_t n = 0, d = 0;
    if (!(header >> id >> n >> d) || n == 0 || d == 0) {
      throw Error(ErrorCode::kParse, "bad feature block header: " + line);
    }
    if (ff.dim_ == 0) ff.dim_ = d;
    if (d != ff.dim_) throw Error(ErrorCode::kParse, "feature dimension changes at block " + id);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "truncated block " + id);
      std::istringstream row(line);
      std::vector<double> v;
      double x;
      while (row >> x) v.push_back(x);
      if (v.size() != d) throw Error(ErrorCode::kParse, "row width mismatch in block " + id);
      rows.push_back(std::move(v));
    }
    if (!ff.blocks_.emplace(id, std::move(rows)).second) {
      throw Error(ErrorCode::kParse, "duplicate feature block " + id);
    }
  }
  return ff;
}

FeatureFile FeatureFile::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open feature file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

const std::vector<std::vector<double>>* FeatureFile::Find(const std::string& sketch_id) const {
  auto it = blocks_.find(sketch_id);
  return it == blocks_.end() ? nullptr : &it->second;
}

}  // namespace sketchguess::corpus
