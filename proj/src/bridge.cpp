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

#include "bridgesr/bridge.hpp"

#include <cmath>
#include <stdexcept>

#include "bridgesr/nn.hpp"

namespace bridgesr {

namespace {

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("bridge: t=" + std::to_string(t) + " outside [0, 1]");
}

}  // namespace

ScheduleCoeffs BridgeSchedule::coeffs(double t) const {
  check_time(t);
  const double s1 = sigma1_sq();
  const double st = integrated(t);
  ScheduleCoeffs c;
  c.sigma = std::sqrt(st);
  c.sigma_bar = std::sqrt(std::max(0.0, s1 - st));
  c.sigma1 = std::sqrt(s1);
  return c;
}

GmaxSchedule::GmaxSchedule(double g_min_sq, double g_max_sq) : g_min_sq_(g_min_sq), g_max_sq_(g_max_sq) {
  if (!(g_min_sq > 0.0) || !(g_max_sq >= g_min_sq)) {
    throw std::invalid_argument("GmaxSchedule: need 0 < g_min^2 <= g_max^2");
  }
}

double GmaxSchedule::g_sq(double t) const {
  const double u = t <= 0.5 ? t : 1.0 - t;
  return g_min_sq_ + 2.0 * (g_max_sq_ - g_min_sq_) * u;
}

double GmaxSchedule::half_integral(double t) const {
  return g_min_sq_ * t + (g_max_sq_ - g_min_sq_) * t * t;
}

double GmaxSchedule::integrated(double t) const {
  if (t <= 0.5) return half_integral(t);
  return 2.0 * half_integral(0.5) - half_integral(1.0 - t);
}

ConstantSchedule::ConstantSchedule(double g_sq) : g_sq_(g_sq) {
  if (!(g_sq > 0.0)) throw std::invalid_argument("ConstantSchedule: need g^2 > 0");
}

double ConstantSchedule::integrated(double t) const { return g_sq_ * t; }

std::unique_ptr<BridgeSchedule> make_schedule(const std::string& name, double g_min_sq, double g_max_sq) {
  if (name == "gmax") return std::make_unique<GmaxSchedule>(g_min_sq, g_max_sq);
  if (name == "constant") return std::make_unique<ConstantSchedule>(g_max_sq);
  throw std::invalid_argument("unknown bridge schedule '" + name + "' (expected gmax or constant)");
}

ScheduleCoeffs schedule_coeffs(const BridgeSchedule& sched, double t) { return sched.coeffs(t); }

Tensor forward_sample(const Tensor& z0, const Tensor& zT, double t, const Tensor& eps, const BridgeSchedule& sched) {
  check_same_shape(z0, zT, "forward_sample");
  check_same_shape(z0, eps, "forward_sample");
  const auto c = sched.coeffs(t);
  // Exact endpoints, without noise leakage from rounding in the coefficients.
  if (c.sigma == 0.0) return z0;
  if (c.sigma_bar == 0.0) return zT;
  const double s1 = c.sigma1 * c.sigma1;
  const double a = c.alpha * c.sigma_bar * c.sigma_bar / s1;
  const double b = c.alpha_bar * c.sigma * c.sigma / s1;
  const double n = c.alpha * c.sigma_bar * c.sigma / c.sigma1;
  Tensor out(z0.b, z0.c, z0.t);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a * z0.data[i] + b * zT.data[i] + n * eps.data[i];
  return out;
}

Tensor loss_target(const Tensor& z_t, const Tensor& z0, double t, const BridgeSchedule& sched) {
  check_same_shape(z_t, z0, "loss_target");
  const auto c = sched.coeffs(t);
  if (c.sigma == 0.0) throw std::domain_error("loss_target: sigma_t is zero at t=" + std::to_string(t));
  Tensor out(z_t.b, z_t.c, z_t.t);
  const double k = 1.0 / (c.alpha * c.sigma);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = (z_t.data[i] - c.alpha * z0.data[i]) * k;
  return out;
}

Tensor estimate_z0(const Tensor& z_t, const Tensor& eps_hat, double t, const BridgeSchedule& sched) {
  check_same_shape(z_t, eps_hat, "estimate_z0");
  const auto c = sched.coeffs(t);
  Tensor out(z_t.b, z_t.c, z_t.t);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = z_t.data[i] / c.alpha - c.sigma * eps_hat.data[i];
  return out;
}

Tensor sde_step(const Tensor& z_s, const Tensor& z0_hat, double s, double t, const Tensor& eps,
                const BridgeSchedule& sched) {
  check_same_shape(z_s, z0_hat, "sde_step");
  check_same_shape(z_s, eps, "sde_step");
  if (!(t < s)) throw std::invalid_argument("sde_step: need t < s");
  const auto cs = sched.coeffs(s);
  const auto ct = sched.coeffs(t);
  if (cs.sigma == 0.0) throw std::domain_error("sde_step: sigma_s is zero");
  const double r = (ct.sigma * ct.sigma) / (cs.sigma * cs.sigma);
  const double keep = ct.alpha * r / cs.alpha;
  const double pull = ct.alpha * (1.0 - r);
  const double noise = ct.alpha * ct.sigma * std::sqrt(std::max(0.0, 1.0 - r));
  Tensor out(z_s.b, z_s.c, z_s.t);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = keep * z_s.data[i] + pull * z0_hat.data[i] + noise * eps.data[i];
  }
  return out;
}

double grid_time(int i, int n_steps) { return 1.0 - static_cast<double>(i) / n_steps; }

Tensor sample(const NoiseFn& predictor, const Tensor& zT, int n_steps, std::mt19937_64& rng,
              const BridgeSchedule& sched) {
  if (n_steps < 1) throw std::invalid_argument("sample: n_steps must be >= 1");
  Tensor z = zT;
  for (int i = 0; i < n_steps; ++i) {
    const double s = grid_time(i, n_steps);
    const double t = grid_time(i + 1, n_steps);
    const Tensor eps_hat = predictor(z, s);
    const Tensor z0_hat = estimate_z0(z, eps_hat, s, sched);
    const Tensor eps = randn(z.b, z.c, z.t, rng);
    z = sde_step(z, z0_hat, s, t, eps, sched);
    if (!all_finite(z)) throw std::runtime_error("sample: non-finite state at step " + std::to_string(i));
  }
  return z;
}

}  // namespace bridgesr
