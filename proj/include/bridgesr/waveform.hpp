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
#include <string>
#include <vector>

namespace bridgesr {

/// Mono sample buffer with its sample rate. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  Waveform() = default;
  Waveform(std::vector<double> s, int sr) : samples(std::move(s)), sample_rate(sr) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double nyquist() const { return 0.5 * sample_rate; }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Throws std::invalid_argument if the rate is not positive or a sample is not finite.
void validate(const Waveform& wav);

enum class WavEncoding { Pcm16, Pcm24, Float32 };

// RIFF/WAVE mono files; 8 kHz to 192 kHz.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wav,
               WavEncoding encoding = WavEncoding::Float32);

// Serialises to an in-memory RIFF image. Used by write_wav and the tests.
std::vector<std::uint8_t> encode_wav(const Waveform& wav, WavEncoding encoding);
Waveform decode_wav(const std::vector<std::uint8_t>& bytes);

}  // namespace bridgesr
