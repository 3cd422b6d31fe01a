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

#include <complex>
#include <vector>

#include "bridgesr/fft.hpp"
#include "bridgesr/waveform.hpp"

namespace bridgesr {

enum class WindowType { Hann };

struct StftParams {
  int fft_size = 2048;
  int hop = 512;
  WindowType window = WindowType::Hann;
};

/// Throws unless fft_size is a power of two and the hop gives a constant
/// overlap-add (hop divides fft_size and hop <= fft_size / 2).
void validate(const StftParams& params);

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Complex STFT, F = fft_size/2 + 1 bins by T frames, stored frame-major.
/// Frames are centred: the signal is reflect-padded by fft_size/2 on both sides
/// and T = 1 + L / hop.
struct Spectrogram {
  StftParams params;
  int sample_rate = 0;
  std::size_t signal_length = 0;
  int num_bins = 0;
  int num_frames = 0;
  std::vector<Complex> bins;

  Complex& at(int f, int t) { return bins[static_cast<std::size_t>(t) * num_bins + f]; }
  const Complex& at(int f, int t) const { return bins[static_cast<std::size_t>(t) * num_bins + f]; }
  double magnitude(int f, int t) const { return std::abs(at(f, t)); }
  double bin_hz() const { return static_cast<double>(sample_rate) / params.fft_size; }
};

Spectrogram stft(const Waveform& wav, const StftParams& params = {});

/// Weighted overlap-add inverse; exact for any spectrogram produced by stft().
Waveform istft(const Spectrogram& spec);

/// Magnitudes as a frame-major F x T array (same layout as Spectrogram::bins).
std::vector<double> magnitudes(const Spectrogram& spec);

/// Index into the reflect-padded signal; shared by the STFT and its adjoint.
std::size_t reflect_index(long i, std::size_t n);

/// Replaces every DFT bin of `generated` below `cutoff_hz` by the matching bin
/// of `reference`, using one DFT over the whole clip. The hard mask makes this a
/// projection, so applying it twice changes nothing.
Waveform replace_low_band(const Waveform& generated, const Waveform& reference, double cutoff_hz);

}  // namespace bridgesr
