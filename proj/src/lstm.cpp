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

#include "sketchguess/error.hpp"
#include "sketchguess/neuralcore.hpp"

namespace sketchguess::nn {

namespace {

Vec SigmoidVec(const Vec& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

std::span<double> Span(Mat& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> Span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> Span(const Mat& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> Span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

LstmParams LstmParams::Zeros(int input_dim, int hidden_dim, int output_dim) {
  if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "LSTM dimensions must be positive");
  }
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.output_dim = output_dim;
  p.w_x = Mat::Zero(4 * hidden_dim, input_dim);
  p.w_h = Mat::Zero(4 * hidden_dim, hidden_dim);
  p.b = Vec::Zero(4 * hidden_dim);
  p.w_out = Mat::Zero(output_dim, hidden_dim);
  p.b_out = Vec::Zero(output_dim);
  return p;
}

LstmParams LstmParams::Init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed,
                            double gain) {
  LstmParams p = Zeros(input_dim, hidden_dim, output_dim);
  const int h = hidden_dim;
  for (int gate = 0; gate < 4; ++gate) {
    p.w_x.block(gate * h, 0, h, input_dim) =
        OrthogonalInit(h, input_dim, gain, seed * 16 + static_cast<std::uint64_t>(gate));
    p.w_h.block(gate * h, 0, h, h) =
        OrthogonalInit(h, h, gain, seed * 16 + 4 + static_cast<std::uint64_t>(gate));
  }
  p.b.segment(h, h).setOnes();
  p.w_out = OrthogonalInit(output_dim, hidden_dim, gain, seed * 16 + 8);
  return p;
}

std::vector<TensorView> LstmParams::Tensors() {
  return {{"w_x", Span(w_x)}, {"w_h", Span(w_h)}, {"b", Span(b)},
          {"w_out", Span(w_out)}, {"b_out", Span(b_out)}};
}

std::vector<ConstTensorView> LstmParams::Tensors() const {
  return {{"w_x", Span(w_x)}, {"w_h", Span(w_h)}, {"b", Span(b)},
          {"w_out", Span(w_out)}, {"b_out", Span(b_out)}};
}

std::size_t LstmParams::ParameterCount() const {
  std::size_t n = 0;
  for (const auto& t : Tensors()) n += t.data.size();
  return n;
}

void LstmParams::Validate() const {
  const int h4 = 4 * hidden_dim;
  if (w_x.rows() != h4 || w_x.cols() != input_dim || w_h.rows() != h4 ||
      w_h.cols() != hidden_dim || b.size() != h4 || w_out.rows() != output_dim ||
      w_out.cols() != hidden_dim || b_out.size() != output_dim) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent LSTM parameter shapes");
  }
}

bool LstmParams::AllFinite() const {
  for (const auto& t : Tensors()) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool LstmParams::operator==(const LstmParams& o) const {
  return input_dim == o.input_dim && hidden_dim == o.hidden_dim && output_dim == o.output_dim &&
         w_x == o.w_x && w_h == o.w_h && b == o.b && w_out == o.w_out && b_out == o.b_out;
}

LstmState LstmState::Zero(int hidden_dim) {
  return {Vec::Zero(hidden_dim), Vec::Zero(hidden_dim)};
}

std::vector<Vec> LstmTrace::Outputs() const {
  std::vector<Vec> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.y);
  return out;
}

Vec LstmStep(const LstmParams& p, const Vec& x, LstmState& state, LstmStepCache* cache) {
  if (x.size() != p.input_dim) {
    throw Error(ErrorCode::kInvalidArgument, "LSTM input dimension mismatch: got " +
                                                 std::to_string(x.size()) + ", expected " +
                                                 std::to_string(p.input_dim));
  }
  if (!x.allFinite()) throw Error(ErrorCode::kInvalidArgument, "non-finite LSTM input");
  const int h = p.hidden_dim;
  Vec z = p.w_x * x + p.w_h * state.h + p.b;
  Vec i = SigmoidVec(z.segment(0, h));
  Vec f = SigmoidVec(z.segment(h, h));
  Vec g = z.segment(2 * h, h).array().tanh().matrix();
  Vec o = SigmoidVec(z.segment(3 * h, h));
  Vec c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  Vec tanh_c = c.array().tanh().matrix();
  Vec hn = o.cwiseProduct(tanh_c);
  Vec y = p.w_out * hn + p.b_out;
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tanh_c = tanh_c;
    cache->h = hn;
    cache->y = y;
  }
  state.h = std::move(hn);
  state.c = std::move(c);
  return y;
}

LstmTrace LstmForward(const LstmParams& p, std::span<const Vec> inputs) {
  p.Validate();
  LstmTrace trace;
  trace.steps.resize(inputs.size());
  LstmState state = LstmState::Zero(p.hidden_dim);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    LstmStep(p, inputs[t], state, &trace.steps[t]);
  }
  return trace;
}

LstmParams LstmBackward(const LstmParams& p, const LstmTrace& trace,
                        std::span<const Vec> d_outputs) {
  if (d_outputs.size() != trace.steps.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gradient count does not match trace length");
  }
  const int h = p.hidden_dim;
  LstmParams grad = LstmParams::Zeros(p.input_dim, p.hidden_dim, p.output_dim);
  Vec dh_next = Vec::Zero(h);
  Vec dc_next = Vec::Zero(h);
  Vec dz(4 * h);
  for (std::size_t k = trace.steps.size(); k-- > 0;) {
    const LstmStepCache& s = trace.steps[k];
    const Vec& dy = d_outputs[k];
    grad.w_out.noalias() += dy * s.h.transpose();
    grad.b_out += dy;
    Vec dh = p.w_out.transpose() * dy + dh_next;
    Vec d_o = dh.cwiseProduct(s.tanh_c);
    Vec dc = dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix()) +
             dc_next;
    Vec d_f = dc.cwiseProduct(s.c_prev);
    Vec d_i = dc.cwiseProduct(s.g);
    Vec d_g = dc.cwiseProduct(s.i);
    dc_next = dc.cwiseProduct(s.f);
    dz.segment(0, h) = d_i.array() * s.i.array() * (1.0 - s.i.array());
    dz.segment(h, h) = d_f.array() * s.f.array() * (1.0 - s.f.array());
    dz.segment(2 * h, h) = d_g.array() * (1.0 - s.g.array().square());
    dz.segment(3 * h, h) = d_o.array() * s.o.array() * (1.0 - s.o.array());
    grad.w_x.noalias() += dz * s.x.transpose();
    grad.w_h.noalias() += dz * s.h_prev.transpose();
    grad.b += dz;
    dh_next = p.w_h.transpose() * dz;
  }
  return grad;
}

}  // namespace sketchguess::nn
