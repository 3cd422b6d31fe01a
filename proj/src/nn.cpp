// Copyright 2026 The bridgesr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bridgesr/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgesr {

void init_uniform(Parameter& p, int fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : p.value.data) v = dist(rng);
  p.zero_grad();
}

void append(std::vector<Parameter*>& dst, const std::vector<Parameter*>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

std::size_t parameter_count(const std::vector<Parameter*>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->value.size();
  return n;
}

Tensor randn(int b, int c, int t, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor out(b, c, t);
  for (auto& v : out.data) v = dist(rng);
  return out;
}

Conv1d::Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride_, int dilation_, PadMode pad_)
    : weight(name + ".weight", Tensor(out_ch, in_ch, kernel)),
      bias(name + ".bias", Tensor(1, out_ch, 1)),
      stride(stride_),
      dilation(dilation_),
      pad(pad_) {
  if (in_ch < 1 || out_ch < 1 || kernel < 1) throw std::invalid_argument("Conv1d '" + name + "': invalid dims");
}

void Conv1d::init(std::mt19937_64& rng) {
  const int fan_in = weight.value.c * weight.value.t;
  init_uniform(weight, fan_in, rng);
  init_uniform(bias, fan_in, rng);
}

Tape::Var Conv1d::operator()(Tape& tape, Tape::Var x) {
  return tape.conv1d(x, tape.param(weight), tape.param(bias), stride, dilation, pad);
}

Tape::Var Conv1d::operator()(Tape& tape, Tape::Var x) const {
  return tape.conv1d(x, tape.param(weight), tape.param(bias), stride, dilation, pad);
}

ConvTranspose1d::ConvTranspose1d(std::string name, int in_ch, int out_ch, int stride_)
    : weight(name + ".weight", Tensor(in_ch, out_ch, 2 * stride_)),
      bias(name + ".bias", Tensor(1, out_ch, 1)),
      stride(stride_) {
  if (in_ch < 1 || out_ch < 1 || stride_ < 1) {
    throw std::invalid_argument("ConvTranspose1d '" + name + "': invalid dims");
  }
}

void ConvTranspose1d::init(std::mt19937_64& rng) {
  // Each output sample sees in_ch * 2 taps.
  const int fan_in = weight.value.b * 2;
  init_uniform(weight, fan_in, rng);
  init_uniform(bias, fan_in, rng);
}

Tape::Var ConvTranspose1d::operator()(Tape& tape, Tape::Var x) {
  return tape.conv_transpose1d(x, tape.param(weight), tape.param(bias), stride);
}

Tape::Var ConvTranspose1d::operator()(Tape& tape, Tape::Var x) const {
  return tape.conv_transpose1d(x, tape.param(weight), tape.param(bias), stride);
}

}  // namespace bridgesr
