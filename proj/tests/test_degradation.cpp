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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "bridgesr/degradation.hpp"
#include "test_support.hpp"

namespace bridgesr {
namespace {

using testing::random_tensor;
using testing::white_noise;

TEST(BlurKernel, NormalisedSymmetricPositive) {
  for (double b : {1e-3, 0.05, 0.3, 1.0, 7.0}) {
    const auto w = blur_kernel(b);
    ASSERT_EQ(w.size(), 5u);
    double sum = 0.0;
    for (double v : w) {
      // Outer taps underflow to zero in the delta limit.
      if (b >= 0.1) {
        EXPECT_GT(v, 0.0);
      } else {
        EXPECT_GE(v, 0.0);
      }
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(w[0], w[4]);
    EXPECT_EQ(w[1], w[3]);
    EXPECT_NEAR(w[1] / w[2], std::exp(-1.0 / (2 * b * b)), 1e-12);
  }
  EXPECT_THROW(blur_kernel(0.0), std::invalid_argument);
}

TEST(BlurLatent, DeltaLimitAndConstantField) {
  const auto z = random_tensor(2, 3, 20, 1);
  EXPECT_LT(testing::max_abs_diff(blur_latent(z, 1e-6).data, z.data), 1e-9);
  EXPECT_EQ(blur_latent(z, 0.0).data, z.data);
  const Tensor c(1, 2, 15, 0.7);
  EXPECT_LT(testing::max_abs_diff(blur_latent(c, 0.3).data, c.data), 1e-15);
  EXPECT_THROW(blur_latent(z, -0.1), std::invalid_argument);
}

TEST(BlurLatent, MatchesBruteForceConvolution) {
  const auto z = random_tensor(2, 3, 17, 2);
  const double b = 0.3;
  const auto out = blur_latent(z, b);
  // Mirror padding without repeating the edge sample: x[-1] = x[1], x[T] = x[T-2].
  const auto mirror = [](int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); };
  for (int i = 0; i < z.b; ++i) {
    for (int ch = 0; ch < z.c; ++ch) {
      for (int n = 0; n < z.t; ++n) {
        double num = 0.0, den = 0.0;
        for (int tau = -2; tau <= 2; ++tau) {
          const double w = std::exp(-tau * tau / (2 * b * b));
          num += w * z(i, ch, mirror(n + tau, z.t));
          den += w;
        }
        EXPECT_NEAR(out(i, ch, n), num / den, 1e-12);
      }
    }
  }
  Latent lat;
  lat.data = random_tensor(1, 3, 9, 3);
  lat.scale = 0.25;
  lat.ratio = 16;
  const auto bl = blur_latent(lat, b);
  EXPECT_EQ(bl.scale, 0.25);
  EXPECT_EQ(bl.ratio, 16);
}

TEST(Policy, HighRatePresets) {
  const auto s1 = DegradationPolicy::first_stage();
  EXPECT_EQ(s1.cutoff_lo, 1000.0);
  EXPECT_EQ(s1.cutoff_hi, 20000.0);
  EXPECT_EQ(s1.order_lo, 2);
  EXPECT_EQ(s1.order_hi, 10);
  EXPECT_EQ(s1.families.size(), 4u);
  const auto s2 = DegradationPolicy::fixed_chebyshev(16000.0, 48000.0);
  EXPECT_EQ(s2.families, std::vector<FilterFamily>{FilterFamily::Chebyshev1});
  EXPECT_EQ(s2.order_lo, 8);
  EXPECT_EQ(s2.order_hi, 8);
  EXPECT_NO_THROW(validate(s2, 96000));
  EXPECT_THROW(validate(s2, 48000), std::invalid_argument);
  auto bad = s1;
  bad.cutoff_lo = 5000.0;
  bad.cutoff_hi = 4000.0;
  EXPECT_THROW(validate(bad, 48000), std::invalid_argument);
}

TEST(SimulateLr, StageOneDrawsAreUniform) {
  const Waveform hr = white_noise(256, 48000, 4);
  const auto pol = DegradationPolicy::first_stage();
  std::mt19937_64 rng(5);
  std::vector<double> cutoffs;
  std::map<int, int> orders;
  std::map<FilterFamily, int> fams;
  for (int i = 0; i < 1000; ++i) {
    const auto d = simulate_lr(hr, pol, rng);
    EXPECT_EQ(d.lr.size(), hr.size());
    EXPECT_EQ(d.lr.sample_rate, hr.sample_rate);
    EXPECT_EQ(d.f_prior, d.filter.cutoff_hz);
    cutoffs.push_back(d.f_prior);
    ++orders[d.filter.order];
    ++fams[d.filter.family];
  }
  EXPECT_GT(testing::ks_uniform_p(cutoffs, 1000.0, 20000.0), 0.01);
  EXPECT_EQ(orders.size(), 9u);
  EXPECT_EQ(orders.begin()->first, 2);
  EXPECT_EQ(orders.rbegin()->first, 10);
  ASSERT_EQ(fams.size(), 4u);
  for (const auto& [f, n] : fams) EXPECT_GT(n, 180) << to_string(f);
}

TEST(SimulateLr, DegenerateRangeAndReproducibility) {
  const Waveform hr = white_noise(4800, 48000, 6);
  const auto pol = DegradationPolicy::fixed_chebyshev(6000.0, 6000.0);
  std::mt19937_64 a(7), b(7);
  const auto da = simulate_lr(hr, pol, a), db = simulate_lr(hr, pol, b);
  EXPECT_EQ(da.f_prior, 6000.0);
  EXPECT_EQ(da.lr.samples, db.lr.samples);
  EXPECT_EQ(da.lr.samples, lowpass(hr, {FilterFamily::Chebyshev1, 8, 6000.0}).samples);
}

TEST(SimulateLr, NyquistCutoffIsBypass) {
  const Waveform hr = white_noise(960, 96000, 8);
  std::mt19937_64 rng(9);
  const auto d = simulate_lr(hr, DegradationPolicy::fixed_chebyshev(48000.0, 48000.0), rng);
  EXPECT_EQ(d.lr.samples, hr.samples);
}

TEST(AnyToAny, InvariantsOverManyDraws) {
  const Waveform x = white_noise(1024, 48000, 10);
  std::mt19937_64 rng(11);
  for (double f_eff : {24000.0, 12000.0, 4000.0, 1500.0}) {
    for (int i = 0; i < 50; ++i) {
      const auto p = prepare_anytoany_pair(x, f_eff, rng);
      ASSERT_TRUE(p.has_value());
      EXPECT_LT(p->f_prior, p->f_target);
      EXPECT_LE(p->f_target, f_eff);
      EXPECT_GE(p->f_prior, 1000.0);
      EXPECT_EQ(p->x_hr.size(), x.size());
      EXPECT_EQ(p->x_lr.size(), x.size());
    }
  }
  EXPECT_FALSE(prepare_anytoany_pair(x, 900.0, rng).has_value());
}

TEST(AnyToAny, LowResolutionIsFilteredHighResolution) {
  const Waveform x = white_noise(4800, 48000, 12);
  std::mt19937_64 a(13), b(13);
  const auto p = prepare_anytoany_pair(x, 12000.0, a);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->x_lr.samples, prepare_anytoany_pair(x, 12000.0, b)->x_lr.samples);
  const FilterSpec hr_spec{FilterFamily::Chebyshev1, 8, p->f_target};
  EXPECT_EQ(p->x_hr.samples, lowpass(x, hr_spec).samples);
  const FilterSpec lr_spec{FilterFamily::Chebyshev1, 8, p->f_prior};
  EXPECT_EQ(p->x_lr.samples, lowpass(p->x_hr, lr_spec).samples);
}

TEST(AnyToAny, OptionRangesAreRespected) {
  const Waveform x = white_noise(512, 8000, 14);
  PairOptions o;
  o.f_target_lo = 3600.0;
  o.f_target_hi = 4000.0;
  o.f_prior_lo = 1800.0;
  o.f_prior_hi = 2000.0;
  std::mt19937_64 rng(15);
  for (int i = 0; i < 40; ++i) {
    const auto p = prepare_anytoany_pair(x, 4000.0, rng, o);
    ASSERT_TRUE(p.has_value());
    EXPECT_GE(p->f_target, 3600.0);
    EXPECT_LE(p->f_target, 4000.0);
    EXPECT_GE(p->f_prior, 1800.0);
    EXPECT_LE(p->f_prior, 2000.0);
  }
}

TEST(AugmentPrior, MarginSemantics) {
  const Waveform x = white_noise(9600, 96000, 16);
  EXPECT_EQ(augment_prior(x, 48000, 0.0).samples, x.samples);
  EXPECT_THROW(augment_prior(x, 48000, 24000.0), std::invalid_argument);
  EXPECT_THROW(augment_prior(x, 48000, -1.0), std::invalid_argument);
  const auto y = augment_prior(x, 48000, 4000.0);
  EXPECT_EQ(y.samples, lowpass(x, {FilterFamily::Chebyshev1, 8, 20000.0}).samples);
  // Content above the new edge is removed, content well below is kept.
  const auto band = [](const Waveform& w, double lo, double hi) {
    double e = 0.0;
    for (double f = lo; f <= hi; f += 250.0) e += testing::dft_power(w.samples, f, w.sample_rate);
    return e;
  };
  EXPECT_LT(band(y, 22000.0, 24000.0) / band(x, 22000.0, 24000.0), 0.01);
  EXPECT_NEAR(band(y, 2000.0, 10000.0) / band(x, 2000.0, 10000.0), 1.0, 0.3);
}

}  // namespace
}  // namespace bridgesr
