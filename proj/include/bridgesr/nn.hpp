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

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bridgesr/autodiff.hpp"

namespace bridgesr {

inline constexpr Tape::Var kNoVar = -1;

/// Same-padded 1-D convolution; output length ceil(T / stride).
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride = 1, int dilation = 1,
         PadMode pad = PadMode::Zero);

  Tape::Var operator()(Tape& tape, Tape::Var x);
  Tape::Var operator()(Tape& tape, Tape::Var x) const;
  void init(std::mt19937_64& rng);
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }

  Parameter weight;  // [out, in, kernel]
  Parameter bias;    // [1, out, 1]
  int stride = 1;
  int dilation = 1;
  PadMode pad = PadMode::Zero;
};

/// Transposed convolution with kernel 2*stride, producing exactly T * stride samples.
class ConvTranspose1d {
 public:
  ConvTranspose1d() = default;
  ConvTranspose1d(std::string name, int in_ch, int out_ch, int stride);

  Tape::Var operator()(Tape& tape, Tape::Var x);
  Tape::Var operator()(Tape& tape, Tape::Var x) const;
  void init(std::mt19937_64& rng);
  std::vector<Parameter*> parameters() { return {&weight, &bias}; }

  Parameter weight;  // [in, out, 2 * stride]
  Parameter bias;
  int stride = 2;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
void init_uniform(Parameter& p, int fan_in, std::mt19937_64& rng);

void append(std::vector<Parameter*>& dst, const std::vector<Parameter*>& src);

std::size_t parameter_count(const std::vector<Parameter*>& params);

/// Standard normal tensor drawn in storage order.
Tensor randn(int b, int c, int t, std::mt19937_64& rng);

}  // namespace bridgesr
