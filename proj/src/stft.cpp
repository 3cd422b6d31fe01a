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

#include "bridgesr/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bridgesr {

void validate(const StftParams& params) {
  if (params.fft_size <= 0 || !is_power_of_two(static_cast<std::size_t>(params.fft_size))) {
    throw std::invalid_argument("stft: fft_size must be a power of two");
  }
  if (params.hop <= 0 || params.hop > params.fft_size) {
    throw std::invalid_argument("stft: hop must satisfy 0 < hop <= fft_size");
  }
  if (params.hop > params.fft_size / 2 || params.fft_size % params.hop != 0) {
    throw std::invalid_argument("stft: hop " + std::to_string(params.hop) +
                                " does not satisfy constant overlap-add for a Hann window of " +
                                std::to_string(params.fft_size) + " (need hop | fft_size and hop <= fft_size/2)");
  }
}

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * static_cast<long>(n) - 2;
  long r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<long>(n)) r = period - r;
  return static_cast<std::size_t>(r);
}

Spectrogram stft(const Waveform& wav, const StftParams& params) {
  validate(params);
  if (wav.empty()) throw std::invalid_argument("stft: empty waveform");
  const int n = params.fft_size;
  const long pad = n / 2;
  Spectrogram spec;
  spec.params = params;
  spec.sample_rate = wav.sample_rate;
  spec.signal_length = wav.size();
  spec.num_bins = n / 2 + 1;
  spec.num_frames = 1 + static_cast<int>(wav.size() / static_cast<std::size_t>(params.hop));
  spec.bins.resize(static_cast<std::size_t>(spec.num_bins) * spec.num_frames);

  const FftPlan plan(static_cast<std::size_t>(n));
  const auto window = hann_window(n);
  std::vector<Complex> buf(static_cast<std::size_t>(n));
  for (int t = 0; t < spec.num_frames; ++t) {
    const long start = static_cast<long>(t) * params.hop - pad;
    for (int i = 0; i < n; ++i) {
      buf[i] = window[i] * wav.samples[reflect_index(start + i, wav.size())];
    }
    plan.transform(buf);
    std::copy(buf.begin(), buf.begin() + spec.num_bins, spec.bins.begin() + static_cast<long>(t) * spec.num_bins);
  }
  return spec;
}

Waveform istft(const Spectrogram& spec) {
  validate(spec.params);
  const int n = spec.params.fft_size;
  const long pad = n / 2;
  const FftPlan plan(static_cast<std::size_t>(n));
  const auto window = hann_window(n);
  const std::size_t len = spec.signal_length;
  std::vector<double> acc(len, 0.0), norm(len, 0.0);
  for (int t = 0; t < spec.num_frames; ++t) {
    const std::span<const Complex> half(spec.bins.data() + static_cast<std::size_t>(t) * spec.num_bins,
                                        static_cast<std::size_t>(spec.num_bins));
    const auto frame = plan.inverse_real(half);
    const long start = static_cast<long>(t) * spec.params.hop - pad;
    for (int i = 0; i < n; ++i) {
      const long idx = start + i;
      if (idx < 0 || idx >= static_cast<long>(len)) continue;
      acc[idx] += window[i] * frame[i];
      norm[idx] += window[i] * window[i];
    }
  }
  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i) out.samples[i] = norm[i] > 1e-12 ? acc[i] / norm[i] : 0.0;
  return out;
}

std::vector<double> magnitudes(const Spectrogram& spec) {
  std::vector<double> out(spec.bins.size());
  for (std::size_t i = 0; i < spec.bins.size(); ++i) out[i] = std::abs(spec.bins[i]);
  return out;
}

Waveform replace_low_band(const Waveform& generated, const Waveform& reference, double cutoff_hz) {
  if (generated.sample_rate != reference.sample_rate) {
    throw std::invalid_argument("replace_low_band: sample rates differ");
  }
  if (generated.size() != reference.size()) {
    throw std::invalid_argument("replace_low_band: lengths differ (" + std::to_string(generated.size()) + " vs " +
                                std::to_string(reference.size()) + ")");
  }
  const std::size_t n = generated.size();
  if (n == 0) return generated;
  std::vector<Complex> g(generated.samples.begin(), generated.samples.end());
  std::vector<Complex> r(reference.samples.begin(), reference.samples.end());
  g = dft(g);
  r = dft(r);
  const double bin_hz = static_cast<double>(generated.sample_rate) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Bins k and n - k carry the same frequency, so the output stays real.
    const std::size_t fk = std::min(k, n - k);
    if (static_cast<double>(fk) * bin_hz < cutoff_hz) g[k] = r[k];
  }
  g = dft(g, true);
  Waveform out;
  out.sample_rate = generated.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = g[i].real() / static_cast<double>(n);
  return out;
}

}  // namespace bridgesr
