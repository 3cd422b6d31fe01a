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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bridgesr/waveform.hpp"

namespace bridgesr {

/// Synthetic clip recipe: a harmonic series whose f0 glides exponentially from
/// U(f0_lo, f0_hi) by +-U(glide_lo, glide_hi) octaves, amplitudes 1/h^alpha,
/// each harmonic sounding while h * f0(t) < 0.98 * Nyquist; plus one-pole low-passed
/// noise (pole ~ U(0, noise_pole_max)); under an attack/decay envelope,
/// peak-normalised to `peak`. The glide and the noise floor keep the long-term
/// spectrum dense up to Nyquist, so the clips read as full-band.
struct ToyCorpusConfig {
  int sample_rate = 8000;
  int length = 4096;
  double f0_lo = 100.0;
  double f0_hi = 400.0;
  double glide_lo = 1.0;  // octaves
  double glide_hi = 1.5;
  double alpha_lo = 0.3;
  double alpha_hi = 0.8;
  double noise_lo = 0.1;  // noise RMS relative to the harmonic RMS
  double noise_hi = 0.4;
  double noise_pole_max = 0.3;
  double peak = 0.5;
};

Waveform generate_toy_clip(const ToyCorpusConfig& cfg, std::mt19937_64& rng);

/// Clip i is generated from seed mix(seed, i), so subsets are reproducible.
std::vector<Waveform> generate_toy_corpus(const ToyCorpusConfig& cfg, int count, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct CorpusFile {
  std::filesystem::path path;
  Waveform wav;
};

/// Sorted *.wav files of `dir`. Unreadable files are skipped and reported in `warnings`.
std::vector<CorpusFile> load_wav_dir(const std::filesystem::path& dir, std::vector<std::string>& warnings);

}  // namespace bridgesr
