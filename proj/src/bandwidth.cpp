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

#include "bridgesr/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bridgesr/fft.hpp"
#include "bridgesr/savgol.hpp"
#include "bridgesr/stft.hpp"

namespace bridgesr {

void validate(const EstimatorConfig& cfg) {
  if (cfg.savgol_window <= 0 || cfg.savgol_window % 2 == 0) {
    throw std::invalid_argument("bandwidth: savgol_window must be odd and positive");
  }
  if (cfg.savgol_polyorder <= 0 || cfg.savgol_polyorder >= cfg.savgol_window) {
    throw std::invalid_argument("bandwidth: need 0 < savgol_polyorder < savgol_window");
  }
  if (cfg.downsample_factor <= 0 || cfg.lookahead_k <= 0 || !(cfg.curvature_eps > 0.0) ||
      !(cfg.energy_tau > 0.0)) {
    throw std::invalid_argument("bandwidth: estimator parameters must be positive");
  }
}

std::vector<double> magnitude_spectrum(const Waveform& wav) {
  if (wav.empty()) throw std::invalid_argument("magnitude_spectrum: empty waveform");
  const std::size_t n = next_power_of_two(std::max<std::size_t>(wav.size(), 2));
  const FftPlan plan(n);
  std::vector<Complex> buf(n, 0.0);
  const auto len = wav.size();
  for (std::size_t i = 0; i < len; ++i) {
    const double w = len > 1 ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len - 1)) : 1.0;
    buf[i] = w * wav.samples[i];
  }
  plan.transform(buf);
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

std::vector<double> curvature(std::span<const double> v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.size() < 5) return out;
  for (std::size_t i = 2; i + 2 < v.size(); ++i) {
    out[i] = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / 12.0;
  }
  return out;
}

std::vector<double> smoothed_spectrum(std::span<const double> mag, const EstimatorConfig& cfg) {
  validate(cfg);
  std::vector<double> smooth;
  if (mag.size() >= static_cast<std::size_t>(cfg.savgol_window)) {
    smooth = savgol_smooth(mag, cfg.savgol_window, cfg.savgol_polyorder);
  } else {
    smooth.assign(mag.begin(), mag.end());
  }
  for (double& v : smooth) v = std::abs(v);  // polynomial fit can undershoot zero
  const std::size_t factor = static_cast<std::size_t>(cfg.downsample_factor);
  std::vector<double> out;
  out.reserve(smooth.size() / factor + 1);
  for (std::size_t i = 0; i < smooth.size(); i += factor) {
    const std::size_t end = std::min(smooth.size(), i + factor);
    double acc = 0.0;
    for (std::size_t j = i; j < end; ++j) acc += smooth[j];
    out.push_back(acc / static_cast<double>(end - i));
  }
  return out;
}

BandwidthEstimate estimate_f_eff(const Waveform& wav, const EstimatorConfig& cfg) {
  validate(cfg);
  const double nyquist = wav.nyquist();
  const auto spec = smoothed_spectrum(magnitude_spectrum(wav), cfg);
  const int n = static_cast<int>(spec.size());
  BandwidthEstimate est{nyquist, n, n};

  const auto peak_it = std::max_element(spec.begin(), spec.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) return est;  // silence: no transition to find

  const double floor = peak * 1e-15;
  std::vector<double> logmag(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) logmag[i] = std::log10(std::max(spec[i], floor));
  const auto curv = curvature(logmag);

  const int start = static_cast<int>(peak_it - spec.begin()) + 1;
  const double threshold = cfg.energy_tau * peak;
  for (int i = start; i < n; ++i) {
    if (!(spec[i] < threshold)) continue;
    const int end = std::min(n - 1, i + cfg.lookahead_k);
    double worst = 0.0;
    for (int j = i; j <= end; ++j) worst = std::max(worst, std::abs(curv[j]));
    if (worst < cfg.curvature_eps) {
      est.trunc_index = i;
      est.f_eff = static_cast<double>(i) / n * nyquist;
      return est;
    }
  }
  return est;
}

}  // namespace bridgesr
