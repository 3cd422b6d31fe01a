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

#include <span>
#include <vector>

#include "bridgesr/waveform.hpp"

namespace bridgesr {

struct EstimatorConfig {
  int savgol_window = 31;
  int savgol_polyorder = 3;
  int downsample_factor = 4;
  double curvature_eps = 0.2;   // |d2 log10 X| threshold, per downsampled bin^2
  double energy_tau = 0.03;     // relative to the spectrum maximum
  int lookahead_k = 8;          // downsampled bins
};

void validate(const EstimatorConfig& cfg);

struct BandwidthEstimate {
  double f_eff = 0.0;
  int trunc_index = 0;  // i* on the downsampled spectrum
  int spectrum_len = 0; // N, length of the downsampled spectrum
};

/// |FFT| of the whole clip (Hann-windowed, zero-padded to a power of two).
/// Length fft_len/2 + 1.
std::vector<double> magnitude_spectrum(const Waveform& wav);

/// Five-point second difference; the first and last two entries are 0.
std::vector<double> curvature(std::span<const double> log_mag);

/// Smoothed then block-averaged spectrum that the estimator thresholds.
std::vector<double> smoothed_spectrum(std::span<const double> mag, const EstimatorConfig& cfg);

/// Curvature-aware effective bandwidth. i* is the smallest index above the
/// spectral peak where both |curvature| stays below eps over [i, i+k] and the
/// smoothed magnitude is under tau * max. Falls back to Nyquist.
BandwidthEstimate estimate_f_eff(const Waveform& wav, const EstimatorConfig& cfg = {});

}  // namespace bridgesr
