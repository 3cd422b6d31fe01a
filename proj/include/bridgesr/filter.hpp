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
#include <string>
#include <vector>

#include "bridgesr/waveform.hpp"

namespace bridgesr {

enum class FilterFamily { Chebyshev1, Butterworth, Bessel, Elliptic };

std::string to_string(FilterFamily family);
FilterFamily parse_filter_family(const std::string& name);

struct FilterSpec {
  FilterFamily family = FilterFamily::Chebyshev1;
  int order = 8;
  double cutoff_hz = 0.0;
  double ripple_db = 1.0;       // Chebyshev1 / Elliptic passband ripple
  double stop_atten_db = 60.0;  // Elliptic stopband attenuation
};

inline constexpr int kMaxFilterOrder = 16;

/// Second-order section, a0 normalised to 1. First-order sections carry b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

using SosCascade = std::vector<Biquad>;

/// Digital low-pass realised from the analog prototype of `spec.family` by the
/// bilinear transform with the cutoff pre-warped. Every section has unity gain
/// at DC, so the cascade does too; for even-order Chebyshev1/Elliptic designs the
/// ripple band therefore spans [0, +ripple_db] instead of [-ripple_db, 0].
///
/// Cutoff semantics follow the prototypes: Butterworth and Bessel are -3.01 dB at
/// the cutoff; Chebyshev1 and Elliptic put the passband edge there.
SosCascade design_lowpass(const FilterSpec& spec, int sample_rate);

std::complex<double> frequency_response(const SosCascade& sos, double freq_hz, int sample_rate);
double magnitude_db(const SosCascade& sos, double freq_hz, int sample_rate);

/// Largest pole radius over the cascade.
double max_pole_radius(const SosCascade& sos);

enum class FilterMode { ZeroPhase, Causal };

/// Zero-phase mode runs the cascade forward and backward with odd-extension
/// padding and steady-state initial conditions. An empty cascade is a bypass.
Waveform apply_filter(const Waveform& wav, const SosCascade& sos, FilterMode mode = FilterMode::ZeroPhase);

/// Convenience: design and apply in one call.
Waveform lowpass(const Waveform& wav, const FilterSpec& spec, FilterMode mode = FilterMode::ZeroPhase);

}  // namespace bridgesr
