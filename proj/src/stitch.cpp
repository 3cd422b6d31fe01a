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

#include "bridgesr/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bridgesr/nn.hpp"

namespace bridgesr {

double StitchSchedule::overlap(int step, int n_steps) const {
  return step < switch_fraction * n_steps ? overlap_early : overlap_late;
}

void validate(const StitchSchedule& s) {
  if (!(s.overlap_early >= 0.0 && s.overlap_early < 1.0 && s.overlap_late >= 0.0 && s.overlap_late < 1.0)) {
    throw std::invalid_argument("stitch: overlaps must lie in [0, 1)");
  }
  if (s.overlap_late > s.overlap_early) throw std::invalid_argument("stitch: overlap schedule must be non-increasing");
  if (!(s.switch_fraction >= 0.0 && s.switch_fraction <= 1.0)) {
    throw std::invalid_argument("stitch: switch_fraction must lie in [0, 1]");
  }
}

WindowPlan plan_windows(int length, int window, int hop, int offset) {
  if (length < 1 || window < 1 || hop < 1) throw std::invalid_argument("plan_windows: sizes must be positive");
  WindowPlan plan;
  plan.length = length;
  plan.window = std::min(window, length);
  const int last = length - plan.window;
  if (last == 0) {
    plan.starts = {0};
    return plan;
  }
  hop = std::min(hop, plan.window);  // wider hops would leave frames uncovered
  const int first = ((offset % hop) + hop) % hop;
  if (first > 0) plan.starts.push_back(0);
  for (int p = first; p < last; p += hop) plan.starts.push_back(p);
  plan.starts.push_back(last);
  std::sort(plan.starts.begin(), plan.starts.end());
  plan.starts.erase(std::unique(plan.starts.begin(), plan.starts.end()), plan.starts.end());
  return plan;
}

std::vector<double> window_taper(int window) {
  std::vector<double> w(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) {
    const double s = std::sin(std::numbers::pi * (i + 0.5) / window);
    w[i] = 1e-3 + s * s;
  }
  return w;
}

std::vector<std::vector<double>> normalized_weights(const WindowPlan& plan) {
  const auto taper = window_taper(plan.window);
  std::vector<double> total(static_cast<std::size_t>(plan.length), 0.0);
  for (int s : plan.starts) {
    for (int i = 0; i < plan.window; ++i) total[s + i] += taper[i];
  }
  std::vector<std::vector<double>> out;
  for (int s : plan.starts) {
    std::vector<double> w(static_cast<std::size_t>(plan.window));
    for (int i = 0; i < plan.window; ++i) w[i] = taper[i] / total[s + i];
    out.push_back(std::move(w));
  }
  return out;
}

WeightedMean::WeightedMean(const Tensor& shape_like)
    : mean_(shape_like.b, shape_like.c, shape_like.t), total_(static_cast<std::size_t>(shape_like.t), 0.0) {}

void WeightedMean::add(const Tensor& values, int start, const std::vector<double>& weights) {
  for (int k = 0; k < values.t; ++k) {
    const double w = weights[k];
    total_[start + k] += w;
    const double f = w / total_[start + k];
    for (int i = 0; i < values.b; ++i) {
      for (int ch = 0; ch < values.c; ++ch) {
        double& m = mean_(i, ch, start + k);
        m += f * (values(i, ch, k) - m);
      }
    }
  }
}

Tensor stitch_sample(const WindowNoiseFn& predictor, const Tensor& zT, int window, int n_steps, std::mt19937_64& rng,
                     const BridgeSchedule& sched, const StitchSchedule& schedule, std::vector<WindowPlan>* plans_out) {
  validate(schedule);
  if (n_steps < 1) throw std::invalid_argument("stitch_sample: n_steps must be >= 1");
  if (window < 1) throw std::invalid_argument("stitch_sample: window must be >= 1");
  const auto taper = window_taper(std::min(window, zT.t));
  Tensor z = zT;
  for (int i = 0; i < n_steps; ++i) {
    const double s = grid_time(i, n_steps);
    const double t = grid_time(i + 1, n_steps);
    const int w = std::min(window, zT.t);
    const int hop = std::max(1, static_cast<int>(std::lround(w * (1.0 - schedule.overlap(i, n_steps)))));
    const bool late = i >= schedule.switch_fraction * n_steps;
    const int offset = (schedule.shift_windows && late) ? (i * hop / 4) % hop : 0;
    const WindowPlan plan = plan_windows(zT.t, w, hop, offset);
    WeightedMean acc(z);
    for (int start : plan.starts) {
      const Tensor zw = slice_time(z, start, plan.window);
      const Tensor eps_hat = predictor(zw, slice_time(zT, start, plan.window), s);
      acc.add(estimate_z0(zw, eps_hat, s, sched), start, taper);
    }
    if (plans_out) plans_out->push_back(plan);
    const Tensor eps = randn(z.b, z.c, z.t, rng);
    z = sde_step(z, acc.mean(), s, t, eps, sched);
    if (!all_finite(z)) throw std::runtime_error("stitch_sample: non-finite state at step " + std::to_string(i));
  }
  return z;
}

}  // namespace bridgesr
