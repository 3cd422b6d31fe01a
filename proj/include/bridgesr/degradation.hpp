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

#include <optional>
#include <random>
#include <vector>

#include "bridgesr/bandwidth.hpp"
#include "bridgesr/codec.hpp"
#include "bridgesr/config.hpp"
#include "bridgesr/filter.hpp"
#include "bridgesr/waveform.hpp"

namespace bridgesr {

struct DegradationPolicy {
  double cutoff_lo = 1000.0;
  double cutoff_hi = 20000.0;
  std::vector<FilterFamily> families{FilterFamily::Chebyshev1, FilterFamily::Butterworth, FilterFamily::Bessel,
                                     FilterFamily::Elliptic};
  int order_lo = 2;
  int order_hi = 10;

  /// Random family, order in [2, 10], cutoff ~ U(1000, 20000).
  static DegradationPolicy first_stage();
  /// Chebyshev1 order 8 with cutoff ~ U(lo, hi); hi may reach Nyquist.
  static DegradationPolicy fixed_chebyshev(double lo, double hi);
};

void validate(const DegradationPolicy& policy, int sample_rate);
DegradationPolicy degradation_policy_from(const Config& cfg, const std::string& section = "degrade");

struct DegradedClip {
  Waveform lr;
  double f_prior = 0.0;
  FilterSpec filter;
};

/// Draws (family, order, cutoff) and applies a zero-phase low-pass. f_prior = cutoff.
/// Cutoffs at or above 0.98 * Nyquist leave the clip unfiltered.
DegradedClip simulate_lr(const Waveform& hr, const DegradationPolicy& policy, std::mt19937_64& rng);

struct PairOptions {
  double min_band_hz = 1000.0;
  std::optional<double> f_target_lo;  // default: min_band_hz + 100 Hz
  std::optional<double> f_target_hi;  // default: f_eff
  std::optional<double> f_prior_lo;   // default: min_band_hz
  std::optional<double> f_prior_hi;   // default: f_target
  DegradationPolicy lr_filter = DegradationPolicy::fixed_chebyshev(1000.0, 1000.0);  // family/order source only
};

struct AnyToAnyPair {
  Waveform x_hr;
  Waveform x_lr;
  double f_prior = 0.0;
  double f_target = 0.0;
};

/// x_hr = LPF(x, f_target) with f_target <= f_eff, then x_lr = LPF(x_hr, f_prior)
/// with min_band <= f_prior < f_target. Returns nullopt when f_eff < min_band.
std::optional<AnyToAnyPair> prepare_anytoany_pair(const Waveform& wav, double f_eff, std::mt19937_64& rng,
                                                  const PairOptions& opts = {});

inline constexpr int kBlurHalfWidth = 2;

/// Normalised Gaussian taps w(tau) ~ exp(-tau^2 / (2 b_r^2)) for tau in [-2, 2].
std::vector<double> blur_kernel(double b_r);

/// Per-channel blur along time with reflect padding. b_r == 0 is the identity.
Tensor blur_latent(const Tensor& z, double b_r);
Latent blur_latent(const Latent& z, double b_r);

/// Zero-phase Chebyshev1 order 8 at (prior_sr / 2 - margin). margin == 0 bypasses.
Waveform augment_prior(const Waveform& wav, int prior_sr, double margin_hz);

}  // namespace bridgesr
