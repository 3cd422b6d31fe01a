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

#include "bridgesr/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace bridgesr {

Waveform resample(const Waveform& wav, int target_sr, const ResampleOptions& opts) {
  if (target_sr <= 0) throw std::invalid_argument("resample: target rate must be positive");
  if (wav.sample_rate <= 0) throw std::invalid_argument("resample: source rate must be positive");
  if (target_sr == wav.sample_rate) return wav;

  const long g = std::gcd(static_cast<long>(wav.sample_rate), static_cast<long>(target_sr));
  const long up = target_sr / g;
  const long down = wav.sample_rate / g;
  const std::size_t in_len = wav.size();
  const auto out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) * target_sr / wav.sample_rate));

  // Kernel in units of input samples: cutoff as a fraction of the input Nyquist.
  const double ratio = static_cast<double>(target_sr) / wav.sample_rate;
  const double cutoff = opts.rolloff * std::min(1.0, ratio);
  // Half-width in input samples.
  const double half_width = opts.half_taps / cutoff;
  const double i0_beta = std::cyl_bessel_i(0.0, opts.kaiser_beta);

  auto kernel = [&](double x) {
    if (std::abs(x) >= half_width) return 0.0;
    const double arg = std::numbers::pi * cutoff * x;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(arg) / arg;
    const double r = x / half_width;
    const double win = std::cyl_bessel_i(0.0, opts.kaiser_beta * std::sqrt(1.0 - r * r)) / i0_beta;
    return cutoff * sinc * win;
  };

  // Output sample n sits at input position n * down / up. Its fractional part
  // takes one of `up` values, so one tap table per phase.
  const long span = static_cast<long>(std::ceil(half_width));
  const long taps = 2 * span + 1;
  std::vector<std::vector<double>> table(static_cast<std::size_t>(up), std::vector<double>(static_cast<std::size_t>(taps)));
  for (long phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / up;
    for (long k = 0; k < taps; ++k) table[phase][k] = kernel(static_cast<double>(k - span) - frac);
  }

  Waveform out;
  out.sample_rate = target_sr;
  out.samples.assign(out_len, 0.0);
  const auto& x = wav.samples;
  const long n_in = static_cast<long>(in_len);
  for (std::size_t n = 0; n < out_len; ++n) {
    const long num = static_cast<long>(n) * down;
    const long base = num / up;
    const long phase = num % up;
    const auto& h = table[phase];
    double acc = 0.0;
    for (long k = 0; k < taps; ++k) {
      const long idx = base + k - span;
      if (idx < 0 || idx >= n_in) continue;
      acc += h[k] * x[idx];
    }
    out.samples[n] = acc;
  }
  return out;
}

}  // namespace bridgesr
