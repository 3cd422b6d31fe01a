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

#include "bridgesr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bridgesr {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Waveform generate_toy_clip(const ToyCorpusConfig& cfg, std::mt19937_64& rng) {
  if (cfg.sample_rate <= 0 || cfg.length <= 0) throw std::invalid_argument("toy corpus: invalid rate or length");
  auto uni = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double fs = cfg.sample_rate;
  const double f0_start = uni(cfg.f0_lo, cfg.f0_hi);
  const double glide = uni(cfg.glide_lo, cfg.glide_hi) * (uni(0.0, 1.0) < 0.5 ? -1.0 : 1.0);
  const double f0_end = f0_start * std::exp2(glide);
  const double alpha = uni(cfg.alpha_lo, cfg.alpha_hi);
  const int n = cfg.length;

  // Exponential pitch glide; phase of harmonic h is h times the fundamental phase.
  std::vector<double> phase0(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    phase0[i] = acc;
    const double f0 = f0_start * std::pow(f0_end / f0_start, static_cast<double>(i) / n);
    acc += 2.0 * std::numbers::pi * f0 / fs;
  }
  // Harmonics are gated per sample at 0.98 * Nyquist.
  const double f_limit = 0.98 * 0.5 * fs;
  const double f0_min = std::min(f0_start, f0_end);
  std::vector<double> harm(static_cast<std::size_t>(n), 0.0);
  for (int h = 1; h * f0_min < f_limit; ++h) {
    const double amp = 1.0 / std::pow(static_cast<double>(h), alpha);
    const double phase = uni(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < n; ++i) {
      const double f0 = f0_start * std::pow(f0_end / f0_start, static_cast<double>(i) / n);
      if (h * f0 < f_limit) harm[i] += amp * std::sin(h * phase0[i] + phase);
    }
  }
  double harm_rms = 0.0;
  for (double v : harm) harm_rms += v * v;
  harm_rms = std::sqrt(harm_rms / n);

  const double rho = uni(0.0, cfg.noise_pole_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(static_cast<std::size_t>(n));
  double state = 0.0, noise_rms = 0.0;
  for (int i = 0; i < n; ++i) {
    state = rho * state + (1.0 - rho) * gauss(rng);
    noise[i] = state;
    noise_rms += state * state;
  }
  noise_rms = std::sqrt(noise_rms / n);
  const double noise_gain = uni(cfg.noise_lo, cfg.noise_hi) * harm_rms / std::max(noise_rms, 1e-12);

  const double attack = uni(0.005, 0.05) * fs;
  const double decay = uni(0.2, 1.0) * fs;
  Waveform out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(static_cast<std::size_t>(n));
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double env = (1.0 - std::exp(-i / attack)) * std::exp(-i / decay);
    out.samples[i] = env * (harm[i] + noise_gain * noise[i]);
    peak = std::max(peak, std::abs(out.samples[i]));
  }
  if (peak > 0.0) {
    for (auto& v : out.samples) v *= cfg.peak / peak;
  }
  return out;
}

std::vector<Waveform> generate_toy_corpus(const ToyCorpusConfig& cfg, int count, std::uint64_t seed) {
  std::vector<Waveform> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.push_back(generate_toy_clip(cfg, rng));
  }
  return out;
}

std::vector<CorpusFile> load_wav_dir(const std::filesystem::path& dir, std::vector<std::string>& warnings) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<CorpusFile> out;
  for (const auto& p : paths) {
    try {
      out.push_back({p, read_wav(p)});
    } catch (const std::exception& e) {
      warnings.push_back("skipping " + p.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace bridgesr
