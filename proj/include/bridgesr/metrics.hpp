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

#include <vector>

#include "bridgesr/stft.hpp"
#include "bridgesr/waveform.hpp"

namespace bridgesr {

inline constexpr double kLsdFloor = 1e-8;
inline constexpr double kMrStftFloor = 1e-7;

/// Frame-averaged RMS over bins of log10(S^2 / S_hat^2). Magnitudes are floored
/// at 1e-8. Throws on shape mismatch.
double lsd(const Spectrogram& ref, const Spectrogram& est);

/// LSD restricted to bins whose centre frequency lies in [f1, f2].
double lsd_band(const Spectrogram& ref, const Spectrogram& est, double f1, double f2);

/// Convenience wrappers computing the STFTs with `params`.
double lsd(const Waveform& ref, const Waveform& est, const StftParams& params = {});
double lsd_band(const Waveform& ref, const Waveform& est, double f1, double f2, const StftParams& params = {});

struct SsimConfig {
  int block = 7;
  double eps1 = 0.01;
  double eps2 = 0.02;
};

/// Mean over non-overlapping block x block tiles of the log10-magnitude
/// spectrograms of the SSIM term. Remainder rows and columns are dropped.
/// Equals 1 for identical inputs and is symmetric in its arguments.
double spectral_ssim(const Spectrogram& ref, const Spectrogram& est, const SsimConfig& cfg = {});
double spectral_ssim(const Waveform& ref, const Waveform& est, const StftParams& params = {},
                     const SsimConfig& cfg = {});

struct MrStftConfig {
  std::vector<StftParams> resolutions{{512, 128}, {1024, 256}, {2048, 512}};
};

struct MrStftTerms {
  double spectral_convergence = 0.0;
  double log_magnitude = 0.0;
  double total() const { return spectral_convergence + log_magnitude; }
};

/// Per-resolution sum of ||S - S_hat||_F / ||S||_F (magnitudes) and
/// (1/T) * sum |ln(S / S_hat)|, magnitudes floored at 1e-7.
double mrstft_loss(const Waveform& ref, const Waveform& est, const MrStftConfig& cfg = {});
std::vector<MrStftTerms> mrstft_terms(const Waveform& ref, const Waveform& est, const MrStftConfig& cfg = {});

/// Gradient of mrstft_loss with respect to the estimate samples.
double mrstft_loss_and_grad(const std::vector<double>& ref, const std::vector<double>& est, int sample_rate,
                            const MrStftConfig& cfg, std::vector<double>& grad_est);

}  // namespace bridgesr
