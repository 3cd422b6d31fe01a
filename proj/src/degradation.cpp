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

#include "bridgesr/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bridgesr/predictor.hpp"
#include "bridgesr/stft.hpp"

namespace bridgesr {

DegradationPolicy DegradationPolicy::first_stage() { return DegradationPolicy{}; }

DegradationPolicy DegradationPolicy::fixed_chebyshev(double lo, double hi) {
  DegradationPolicy p;
  p.cutoff_lo = lo;
  p.cutoff_hi = hi;
  p.families = {FilterFamily::Chebyshev1};
  p.order_lo = 8;
  p.order_hi = 8;
  return p;
}

void validate(const DegradationPolicy& policy, int sample_rate) {
  if (!(policy.cutoff_lo > 0.0) || policy.cutoff_hi < policy.cutoff_lo) {
    throw std::invalid_argument("degradation policy: need 0 < cutoff_lo <= cutoff_hi");
  }
  if (!(policy.cutoff_hi <= 0.5 * sample_rate)) {
    throw std::invalid_argument("degradation policy: cutoff_hi " + std::to_string(policy.cutoff_hi) +
                                " Hz exceeds Nyquist of " + std::to_string(sample_rate) + " Hz");
  }
  if (policy.families.empty()) throw std::invalid_argument("degradation policy: no filter families");
  if (policy.order_lo < 1 || policy.order_hi < policy.order_lo || policy.order_hi > kMaxFilterOrder) {
    throw std::invalid_argument("degradation policy: order range must lie in [1, 16]");
  }
}

DegradationPolicy degradation_policy_from(const Config& cfg, const std::string& section) {
  DegradationPolicy p;
  p.cutoff_lo = cfg.get_double(section + ".cutoff_lo");
  p.cutoff_hi = cfg.get_double(section + ".cutoff_hi");
  p.order_lo = cfg.get_int(section + ".order_lo");
  p.order_hi = cfg.get_int(section + ".order_hi");
  p.families.clear();
  std::string fams = cfg.get_string(section + ".families");
  std::size_t pos = 0;
  while (pos <= fams.size()) {
    const auto comma = fams.find(',', pos);
    std::string item = fams.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) p.families.push_back(parse_filter_family(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return p;
}

namespace {

double draw(double lo, double hi, std::mt19937_64& rng) {
  return lo >= hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Below this fraction of Nyquist a low-pass is treated as a no-op.
constexpr double kBypassFraction = 0.98;

Waveform lowpass_or_bypass(const Waveform& x, FilterSpec spec) {
  if (spec.cutoff_hz >= kBypassFraction * x.nyquist()) return x;
  return lowpass(x, spec, FilterMode::ZeroPhase);
}

}  // namespace

DegradedClip simulate_lr(const Waveform& hr, const DegradationPolicy& policy, std::mt19937_64& rng) {
  validate(policy, hr.sample_rate);
  DegradedClip out;
  const auto fam = std::uniform_int_distribution<std::size_t>(0, policy.families.size() - 1)(rng);
  out.filter.family = policy.families[fam];
  out.filter.order = std::uniform_int_distribution<int>(policy.order_lo, policy.order_hi)(rng);
  out.filter.cutoff_hz = policy.cutoff_lo == policy.cutoff_hi
                             ? policy.cutoff_lo
                             : std::uniform_real_distribution<double>(policy.cutoff_lo, policy.cutoff_hi)(rng);
  out.lr = lowpass_or_bypass(hr, out.filter);
  out.f_prior = out.filter.cutoff_hz;
  return out;
}

std::optional<AnyToAnyPair> prepare_anytoany_pair(const Waveform& wav, double f_eff, std::mt19937_64& rng,
                                                  const PairOptions& opts) {
  const double nyq = wav.nyquist();
  const double top = std::min(f_eff, nyq);
  if (top < opts.min_band_hz) return std::nullopt;
  // One quantum above the prior floor leaves room for f_prior < f_target.
  const double t_lo = std::max(opts.f_target_lo.value_or(opts.min_band_hz + kTargetQuantumHz), opts.min_band_hz);
  const double t_hi = std::min(opts.f_target_hi.value_or(top), top);
  if (t_hi < t_lo) return std::nullopt;
  // Quantise down so the target never exceeds f_eff.
  double f_target = draw(t_lo, t_hi, rng);
  f_target = std::max(std::floor(f_target / kTargetQuantumHz) * kTargetQuantumHz, t_lo);
  f_target = std::min(f_target, t_hi);

  const double p_lo = std::max(opts.f_prior_lo.value_or(opts.min_band_hz), opts.min_band_hz);
  const double p_hi = std::min(opts.f_prior_hi.value_or(f_target), f_target);
  if (!(p_lo < f_target)) return std::nullopt;
  double f_prior = draw(p_lo, p_hi, rng);
  if (f_prior >= f_target) f_prior = std::nextafter(f_target, 0.0);

  const auto& pol = opts.lr_filter;
  FilterSpec spec;
  spec.family = pol.families[std::uniform_int_distribution<std::size_t>(0, pol.families.size() - 1)(rng)];
  spec.order = std::uniform_int_distribution<int>(pol.order_lo, pol.order_hi)(rng);

  AnyToAnyPair pair;
  spec.cutoff_hz = f_target;
  pair.x_hr = lowpass_or_bypass(wav, spec);
  spec.cutoff_hz = f_prior;
  pair.x_lr = lowpass_or_bypass(pair.x_hr, spec);
  pair.f_prior = f_prior;
  pair.f_target = f_target;
  return pair;
}

std::vector<double> blur_kernel(double b_r) {
  if (!(b_r > 0.0)) throw std::invalid_argument("blur_kernel: b_r must be positive");
  std::vector<double> w(2 * kBlurHalfWidth + 1);
  double z = 0.0;
  for (int tau = -kBlurHalfWidth; tau <= kBlurHalfWidth; ++tau) {
    const double v = std::exp(-static_cast<double>(tau * tau) / (2.0 * b_r * b_r));
    w[tau + kBlurHalfWidth] = v;
    z += v;
  }
  for (auto& v : w) v /= z;
  return w;
}

Tensor blur_latent(const Tensor& z, double b_r) {
  if (!(b_r >= 0.0)) throw std::invalid_argument("blur_latent: b_r must be non-negative");
  if (b_r == 0.0 || z.t < 2) return z;
  const auto w = blur_kernel(b_r);
  Tensor out(z.b, z.c, z.t);
  for (int i = 0; i < z.b; ++i) {
    for (int ch = 0; ch < z.c; ++ch) {
      const double* src = z.row(i, ch);
      double* dst = out.row(i, ch);
      for (int n = 0; n < z.t; ++n) {
        double acc = 0.0;
        for (int tau = -kBlurHalfWidth; tau <= kBlurHalfWidth; ++tau) {
          acc += w[tau + kBlurHalfWidth] * src[reflect_index(n + tau, static_cast<std::size_t>(z.t))];
        }
        dst[n] = acc;
      }
    }
  }
  return out;
}

Latent blur_latent(const Latent& z, double b_r) {
  Latent out = z;
  out.data = blur_latent(z.data, b_r);
  return out;
}

Waveform augment_prior(const Waveform& wav, int prior_sr, double margin_hz) {
  const double prior_nyq = 0.5 * prior_sr;
  if (!(margin_hz >= 0.0)) throw std::invalid_argument("augment_prior: margin must be non-negative");
  if (margin_hz >= prior_nyq) {
    throw std::invalid_argument("augment_prior: margin " + std::to_string(margin_hz) + " Hz >= prior Nyquist " +
                                std::to_string(prior_nyq) + " Hz");
  }
  if (margin_hz == 0.0) return wav;
  const double cutoff = prior_nyq - margin_hz;
  if (cutoff >= wav.nyquist()) return wav;
  FilterSpec spec;
  spec.family = FilterFamily::Chebyshev1;
  spec.order = 8;
  spec.cutoff_hz = cutoff;
  return lowpass(wav, spec, FilterMode::ZeroPhase);
}

}  // namespace bridgesr
