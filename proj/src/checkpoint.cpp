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

#include <fstream>
#include <sstream>

#include "sketchguess/error.hpp"
#include "sketchguess/neuralcore.hpp"

namespace sketchguess::nn {

using nlohmann::ordered_json;

const NamedTensor* Checkpoint::Find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string SerializeCheckpoint(const Checkpoint& ckpt) {
  ordered_json j;
  j["config"] = ckpt.config;
  j["seed"] = ckpt.seed;
  ordered_json tensors = ordered_json::array();
  for (const auto& t : ckpt.tensors) {
    ordered_json e;
    e["name"] = t.name;
    e["shape"] = t.shape;
    e["data"] = t.data;
    tensors.push_back(std::move(e));
  }
  j["tensors"] = std::move(tensors);
  std::string out(kCheckpointMagic);
  out += '\n';
  out += j.dump();
  out += '\n';
  return out;
}

Checkpoint DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw Error(ErrorCode::kParse, "not a checkpoint (bad magic)");
  }
  bytes.remove_prefix(kCheckpointMagic.size());
  ordered_json j = ordered_json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kParse, "corrupt checkpoint body");
  Checkpoint ckpt;
  try {
    ckpt.config = j.at("config");
    ckpt.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("tensors")) {
      NamedTensor t;
      t.name = e.at("name").get<std::string>();
      t.shape = e.at("shape").get<std::vector<std::size_t>>();
      t.data = e.at("data").get<std::vector<double>>();
      std::size_t expect = 1;
      for (auto s : t.shape) expect *= s;
      if (expect != t.data.size()) {
        throw Error(ErrorCode::kParse, "tensor " + t.name + " size does not match its shape");
      }
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("corrupt checkpoint: ") + e.what());
  }
  return ckpt;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint: " + path.string());
  out << SerializeCheckpoint(ckpt);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return DeserializeCheckpoint(buf.str());
}

namespace {

NamedTensor FromMatrix(std::string name, const Mat& m) {
  return {std::move(name),
          {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
          std::vector<double>(m.data(), m.data() + m.size())};
}

NamedTensor FromVector(std::string name, const Vec& v) {
  return {std::move(name), {static_cast<std::size_t>(v.size())},
          std::vector<double>(v.data(), v.data() + v.size())};
}

const NamedTensor& Need(const Checkpoint& c, const std::string& name) {
  const NamedTensor* t = c.Find(name);
  if (t == nullptr) throw Error(ErrorCode::kParse, "checkpoint lacks tensor " + name);
  return *t;
}

Mat ToMatrix(const NamedTensor& t, Eigen::Index rows, Eigen::Index cols) {
  if (t.shape.size() != 2 || static_cast<Eigen::Index>(t.shape[0]) != rows ||
      static_cast<Eigen::Index>(t.shape[1]) != cols) {
    throw Error(ErrorCode::kParse, "tensor " + t.name + " has an unexpected shape");
  }
  return Eigen::Map<const Mat>(t.data.data(), rows, cols);
}

Vec ToVector(const NamedTensor& t, Eigen::Index n) {
  if (t.shape.size() != 1 || static_cast<Eigen::Index>(t.shape[0]) != n) {
    throw Error(ErrorCode::kParse, "tensor " + t.name + " has an unexpected shape");
  }
  return Eigen::Map<const Vec>(t.data.data(), n);
}

}  // namespace

// Matrices are stored column-major with shape [rows, cols].
void AppendLstm(Checkpoint& ckpt, const std::string& prefix, const LstmParams& p) {
  ckpt.tensors.push_back(FromMatrix(prefix + ".w_x", p.w_x));
  ckpt.tensors.push_back(FromMatrix(prefix + ".w_h", p.w_h));
  ckpt.tensors.push_back(FromVector(prefix + ".b", p.b));
  ckpt.tensors.push_back(FromMatrix(prefix + ".w_out", p.w_out));
  ckpt.tensors.push_back(FromVector(prefix + ".b_out", p.b_out));
}

LstmParams ReadLstm(const Checkpoint& ckpt, const std::string& prefix) {
  const NamedTensor& wx = Need(ckpt, prefix + ".w_x");
  const NamedTensor& wout = Need(ckpt, prefix + ".w_out");
  if (wx.shape.size() != 2 || wout.shape.size() != 2 || wx.shape[0] % 4 != 0) {
    throw Error(ErrorCode::kParse, "bad LSTM tensor shapes under " + prefix);
  }
  const int in = static_cast<int>(wx.shape[1]);
  const int hid = static_cast<int>(wx.shape[0] / 4);
  const int out = static_cast<int>(wout.shape[0]);
  LstmParams p = LstmParams::Zeros(in, hid, out);
  p.w_x = ToMatrix(wx, 4 * hid, in);
  p.w_h = ToMatrix(Need(ckpt, prefix + ".w_h"), 4 * hid, hid);
  p.b = ToVector(Need(ckpt, prefix + ".b"), 4 * hid);
  p.w_out = ToMatrix(wout, out, hid);
  p.b_out = ToVector(Need(ckpt, prefix + ".b_out"), out);
  return p;
}

}  // namespace sketchguess::nn
