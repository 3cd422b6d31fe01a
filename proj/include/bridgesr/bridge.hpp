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
#include <memory>
#include <random>
#include <string>

#include "bridgesr/tensor.hpp"

namespace bridgesr {

struct ScheduleCoeffs {
  double alpha = 1.0;
  double alpha_bar = 1.0;
  double sigma = 0.0;
  double sigma_bar = 0.0;
  double sigma1 = 0.0;
};

/// Bridge noise schedule with zero drift. Subclasses provide the integrated
/// diffusion G(t) = int_0^t g^2(tau) dtau on [0, 1]; everything else follows.
class BridgeSchedule {
 public:
  virtual ~BridgeSchedule() = default;
  virtual std::string name() const = 0;
  virtual double g_sq(double t) const = 0;
  /// sigma_t^2.
  virtual double integrated(double t) const = 0;
  virtual double g_min_sq() const = 0;
  virtual double g_max_sq() const = 0;

  ScheduleCoeffs coeffs(double t) const;
  double sigma1_sq() const { return integrated(1.0); }
};

/// g^2 rises linearly from g_min^2 at t = 0 to g_max^2 at t = 0.5 and falls back
/// symmetrically, so sigma_t^2 is piecewise quadratic.
class GmaxSchedule final : public BridgeSchedule {
 public:
  explicit GmaxSchedule(double g_min_sq = 0.001, double g_max_sq = 1.0);
  std::string name() const override { return "gmax"; }
  double g_sq(double t) const override;
  double integrated(double t) const override;
  double g_min_sq() const override { return g_min_sq_; }
  double g_max_sq() const override { return g_max_sq_; }

 private:
  double half_integral(double t) const;  // for t in [0, 0.5]
  double g_min_sq_;
  double g_max_sq_;
};

/// Constant g^2; sigma_t^2 = g^2 t (Brownian bridge).
class ConstantSchedule final : public BridgeSchedule {
 public:
  explicit ConstantSchedule(double g_sq = 1.0);
  std::string name() const override { return "constant"; }
  double g_sq(double) const override { return g_sq_; }
  double integrated(double t) const override;
  double g_min_sq() const override { return g_sq_; }
  double g_max_sq() const override { return g_sq_; }

 private:
  double g_sq_;
};

std::unique_ptr<BridgeSchedule> make_schedule(const std::string& name, double g_min_sq, double g_max_sq);

/// Throws std::domain_error for t outside [0, 1].
ScheduleCoeffs schedule_coeffs(const BridgeSchedule& sched, double t);

Tensor forward_sample(const Tensor& z0, const Tensor& zT, double t, const Tensor& eps, const BridgeSchedule& sched);

/// (z_t - alpha_t z0) / (alpha_t sigma_t). Throws std::domain_error when sigma_t == 0.
Tensor loss_target(const Tensor& z_t, const Tensor& z0, double t, const BridgeSchedule& sched);

Tensor estimate_z0(const Tensor& z_t, const Tensor& eps_hat, double t, const BridgeSchedule& sched);

/// First-order SDE step from time s down to t < s.
Tensor sde_step(const Tensor& z_s, const Tensor& z0_hat, double s, double t, const Tensor& eps,
                const BridgeSchedule& sched);

inline constexpr int kDefaultSamplingSteps = 50;
inline constexpr double kTrainingTMin = 1e-4;

/// eps_hat for a state at time t; conditioning is bound by the caller.
using NoiseFn = std::function<Tensor(const Tensor& z_t, double t)>;

/// Uniform grid from 1 to 0 with n_steps intervals. Throws std::runtime_error
/// naming the step index if a state turns non-finite.
Tensor sample(const NoiseFn& predictor, const Tensor& zT, int n_steps, std::mt19937_64& rng,
              const BridgeSchedule& sched);

/// Time of grid point i on the uniform sampling grid.
double grid_time(int i, int n_steps);

}  // namespace bridgesr
