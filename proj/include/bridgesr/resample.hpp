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

#include "bridgesr/waveform.hpp"

namespace bridgesr {

struct ResampleOptions {
  int half_taps = 32;        // zero crossings of the sinc kept on each side (at the lower rate)
  double rolloff = 0.94;     // passband edge as a fraction of the lower Nyquist
  double kaiser_beta = 8.6;  // roughly 80 dB stopband
};

/// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.
/// Output length is round(L * target / source); equal rates return a copy.
Waveform resample(const Waveform& wav, int target_sr, const ResampleOptions& opts = {});

}  // namespace bridgesr
