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

#include <functional>
#include <random>
#include <vector>

#include "bridgesr/bridge.hpp"
#include "bridgesr/tensor.hpp"

namespace bridgesr {

/// Overlap fraction per sampling step: `overlap_early` for the first
/// `switch_fraction` of the steps, `overlap_late` afterwards. Late steps also
/// rotate window positions by step * hop / 4.
struct StitchSchedule {
  double overlap_early = 0.5;
  double overlap_late = 0.25;
  double switch_fraction = 0.5;
  bool shift_windows = true;

  double overlap(int step, int n_steps) const;
};

void validate(const StitchSchedule& s);

struct WindowPlan {
  int length = 0;
  int window = 0;
  std::vector<int> starts;
};

/// Window starts covering [0, length) with the given hop and rotation offset.
WindowPlan plan_windows(int length, int window, int hop, int offset);

/// Raised-sine taper with a small floor so every frame has positive weight.
std::vector<double> window_taper(int window);

/// Per-window weights normalised so they sum to 1 at every frame; indexed [window][frame - start].
std::vector<std::vector<double>> normalized_weights(const WindowPlan& plan);

/// eps_hat for a window of z_t given the matching window of z_T.
using WindowNoiseFn = std::function<Tensor(const Tensor& z_t, const Tensor& z_T, double t)>;

/// Latent-domain windowed sampler. At every step each window predicts z0_hat,
/// the estimates are averaged with normalised taper weights (incremental
/// weighted mean), and one SDE step is taken on the full latent. Falls back to
/// a single window when the latent is shorter than `window`.
Tensor stitch_sample(const WindowNoiseFn& predictor, const Tensor& zT, int window, int n_steps, std::mt19937_64& rng,
                     const BridgeSchedule& sched, const StitchSchedule& schedule = {},
                     std::vector<WindowPlan>* plans_out = nullptr);

/// Incremental weighted mean; a constant field stays exactly constant.
class WeightedMean {
 public:
  explicit WeightedMean(const Tensor& shape_like);
  void add(const Tensor& window_values, int start, const std::vector<double>& weights);
  const Tensor& mean() const { return mean_; }
  const std::vector<double>& total_weight() const { return total_; }

 private:
  Tensor mean_;
  std::vector<double> total_;
};

}  // namespace bridgesr
