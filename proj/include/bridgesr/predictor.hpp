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
#include <filesystem>
#include <optional>
#include <random>
#include <vector>

#include "bridgesr/autodiff.hpp"
#include "bridgesr/bridge.hpp"
#include "bridgesr/checkpoint.hpp"
#include "bridgesr/nn.hpp"

namespace bridgesr {

struct Conditioning {
  double t = 1.0;
  double f_prior = 0.0;   // Hz, continuous
  double f_target = 0.0;  // Hz, quantised to kTargetQuantumHz
  std::optional<double> b_r;
};

inline constexpr double kTargetQuantumHz = 100.0;
inline constexpr double kTimeEmbedScale = 1000.0;
inline constexpr double kBlurEmbedScale = 1e4;

/// Nearest multiple of 100 Hz.
double quantize_f_target(double hz);

/// emb[2j] = sin(value * w_j), emb[2j+1] = cos(value * w_j), w_j = 10000^(-j / (dim/2)).
std::vector<double> sinusoidal_embed(double value, int dim);

struct PredictorConfig {
  int latent_channels = 8;
  int width = 48;
  int blocks = 3;
  int kernel = 3;
  int embed_dim = 32;
  std::vector<int> dilations{1, 2, 4};  // cycled over blocks
  bool blur_token = false;              // cascaded stages condition on b_r
};

void validate(const PredictorConfig& cfg);

/// eps_theta(z_t, t, z_T, f_prior, f_target[, b_r]). z_t and z_T are stacked
/// channel-wise; condition tokens are prepended on the time axis and dropped
/// from the output.
class Predictor {
 public:
  explicit Predictor(PredictorConfig cfg, std::uint64_t seed = 0);

  const PredictorConfig& config() const { return cfg_; }
  int num_tokens() const { return cfg_.blur_token ? 4 : 3; }

  /// z_t, z_T: [B, c, l]; one Conditioning per batch item.
  Tape::Var forward_graph(Tape& tape, Tape::Var z_t, Tape::Var z_T, const std::vector<Conditioning>& cond);
  Tensor forward(const Tensor& z_t, const Tensor& z_T, const std::vector<Conditioning>& cond) const;
  Tensor forward(const Tensor& z_t, const Tensor& z_T, const Conditioning& cond) const;

  std::vector<Parameter*> parameters();

  Checkpoint to_checkpoint() const;
  static Predictor from_checkpoint(const Checkpoint& ckpt);

 private:
  template <typename Self>
  static Tape::Var forward_impl(Self& self, Tape& tape, Tape::Var z_t, Tape::Var z_T,
                                const std::vector<Conditioning>& cond);
  Tensor token_embeddings(const std::vector<Conditioning>& cond, int token) const;

  PredictorConfig cfg_;
  Conv1d in_;
  std::vector<Conv1d> token_proj_;
  std::vector<Conv1d> conv_a_;
  std::vector<Conv1d> conv_b_;
  std::vector<Conv1d> pool_proj_;
  Conv1d out_;
};

/// Mean-squared residual between eps_theta and the bridge target.
struct BridgeBatch {
  Tensor z0;
  Tensor zT;
  Tensor eps;
  std::vector<Conditioning> cond;  // cond[i].t is the diffusion time of item i
};

Tape::Var bridge_loss_graph(Tape& tape, Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched);
double bridge_loss(const Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  std::string worst_param;
};

/// Central differences on `n_params` random scalar parameters vs the tape gradient.
GradCheckResult grad_check(Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched, double eps,
                           int n_params, std::mt19937_64& rng);

}  // namespace bridgesr
