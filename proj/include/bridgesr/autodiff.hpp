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

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "bridgesr/metrics.hpp"
#include "bridgesr/tensor.hpp"

namespace bridgesr {

/// Trainable tensor living outside any tape. Gradients accumulate into `grad`
/// when a tape that references it is run backward.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool frozen = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.b, value.c, value.t) {}
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

enum class PadMode { Zero, Reflect };

/// Reverse-mode tape over rank-3 tensors. Nodes are appended in evaluation
/// order; backward() walks them in reverse.
class Tape {
 public:
  using Var = int;

  Var constant(Tensor value);
  /// Tracked leaf: backward() accumulates into p.grad.
  Var param(Parameter& p);
  /// Untracked copy for read-only inference.
  Var param(const Parameter& p) { return constant(p.value); }

  const Tensor& value(Var v) const { return nodes_[v].value; }
  const Tensor& grad(Var v) const { return nodes_[v].grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 for a 1x1x1 loss and propagates.
  void backward(Var loss);

  // Layers.
  Var conv1d(Var x, Var w, Var bias, int stride = 1, int dilation = 1, PadMode pad = PadMode::Zero);
  Var conv_transpose1d(Var x, Var w, Var bias, int stride);

  // Elementwise.
  Var silu(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double k);
  Var add_time_broadcast(Var x, Var y);  // x: [B,C,T], y: [B,C,1]

  // Shape.
  Var concat_channels(Var a, Var b);
  Var concat_time(const std::vector<Var>& parts);
  Var slice_time(Var x, int start, int len);
  Var slice_channels(Var x, int start, int len);
  Var mean_time(Var x);

  // Losses and variational pieces. All losses return 1x1x1.
  Var mse(Var pred, Var target);
  Var reparameterize(Var mu, Var logvar, const Tensor& eps);
  Var gaussian_kl(Var mu, Var logvar);  // batch mean of per-item summed KL
  Var mrstft(Var est, const Tensor& ref, int sample_rate, const MrStftConfig& cfg);  // batch mean

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void()> backward;
    Parameter* param = nullptr;
  };

  Var push(Tensor value, std::function<void()> backward = {});
  Tensor& g(Var v) { return nodes_[v].grad; }

  std::deque<Node> nodes_;
};

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// Adam with bias correction. Frozen parameters are skipped.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig cfg = {});

  /// Throws std::runtime_error naming the parameter if any gradient is non-finite.
  void step();
  void zero_grad();
  long steps_taken() const { return step_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  long step_ = 0;
};

}  // namespace bridgesr
