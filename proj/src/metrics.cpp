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

#include "bridgesr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bridgesr {

namespace {

void check_shapes(const Spectrogram& a, const Spectrogram& b) {
  if (a.num_bins != b.num_bins || a.num_frames != b.num_frames) {
    throw std::invalid_argument("metrics: spectrogram shapes differ (" + std::to_string(a.num_bins) + "x" +
                                std::to_string(a.num_frames) + " vs " + std::to_string(b.num_bins) + "x" +
                                std::to_string(b.num_frames) + ")");
  }
}

double lsd_bins(const Spectrogram& ref, const Spectrogram& est, int lo, int hi) {
  double total = 0.0;
  const int count = hi - lo + 1;
  for (int t = 0; t < ref.num_frames; ++t) {
    double acc = 0.0;
    for (int f = lo; f <= hi; ++f) {
      const double s = std::max(ref.magnitude(f, t), kLsdFloor);
      const double e = std::max(est.magnitude(f, t), kLsdFloor);
      const double d = std::log10((s * s) / (e * e));
      acc += d * d;
    }
    total += std::sqrt(acc / count);
  }
  return total / ref.num_frames;
}

}  // namespace

double lsd(const Spectrogram& ref, const Spectrogram& est) {
  check_shapes(ref, est);
  return lsd_bins(ref, est, 0, ref.num_bins - 1);
}

double lsd_band(const Spectrogram& ref, const Spectrogram& est, double f1, double f2) {
  check_shapes(ref, est);
  const double nyquist = 0.5 * ref.sample_rate;
  if (!(f1 >= 0.0) || !(f1 < f2) || f2 > nyquist * (1.0 + 1e-12)) {
    throw std::invalid_argument("lsd_band: need 0 <= f1 < f2 <= Nyquist");
  }
  const double bin = ref.bin_hz();
  const int lo = static_cast<int>(std::ceil(f1 / bin - 1e-9));
  const int hi = std::min(ref.num_bins - 1, static_cast<int>(std::floor(f2 / bin + 1e-9)));
  if (hi < lo) throw std::invalid_argument("lsd_band: band contains no bins");
  return lsd_bins(ref, est, lo, hi);
}

double lsd(const Waveform& ref, const Waveform& est, const StftParams& params) {
  return lsd(stft(ref, params), stft(est, params));
}

double lsd_band(const Waveform& ref, const Waveform& est, double f1, double f2, const StftParams& params) {
  return lsd_band(stft(ref, params), stft(est, params), f1, f2);
}

double spectral_ssim(const Spectrogram& ref, const Spectrogram& est, const SsimConfig& cfg) {
  check_shapes(ref, est);
  const int b = cfg.block;
  if (ref.num_bins < b || ref.num_frames < b) {
    throw std::invalid_argument("spectral_ssim: spectrogram smaller than one block");
  }
  auto logmag = [](const Spectrogram& s, int f, int t) { return std::log10(std::max(s.magnitude(f, t), kLsdFloor)); };
  const int fb = ref.num_bins / b;
  const int tb = ref.num_frames / b;
  const double n = static_cast<double>(b) * b;
  double total = 0.0;
  for (int bf = 0; bf < fb; ++bf) {
    for (int bt = 0; bt < tb; ++bt) {
      double sx = 0.0, sy = 0.0;
      for (int f = bf * b; f < (bf + 1) * b; ++f) {
        for (int t = bt * b; t < (bt + 1) * b; ++t) {
          sx += logmag(ref, f, t);
          sy += logmag(est, f, t);
        }
      }
      const double mx = sx / n, my = sy / n;
      double vx = 0.0, vy = 0.0, cov = 0.0;
      for (int f = bf * b; f < (bf + 1) * b; ++f) {
        for (int t = bt * b; t < (bt + 1) * b; ++t) {
          const double dx = logmag(ref, f, t) - mx;
          const double dy = logmag(est, f, t) - my;
          vx += dx * dx;
          vy += dy * dy;
          cov += dx * dy;
        }
      }
      vx /= n;
      vy /= n;
      cov /= n;
      total += ((2.0 * mx * my + cfg.eps1) * (2.0 * cov + cfg.eps2)) /
               ((mx * mx + my * my + cfg.eps1) * (vx + vy + cfg.eps2));
    }
  }
  return total / (static_cast<double>(fb) * tb);
}

double spectral_ssim(const Waveform& ref, const Waveform& est, const StftParams& params, const SsimConfig& cfg) {
  return spectral_ssim(stft(ref, params), stft(est, params), cfg);
}

std::vector<MrStftTerms> mrstft_terms(const Waveform& ref, const Waveform& est, const MrStftConfig& cfg) {
  if (ref.size() != est.size()) throw std::invalid_argument("mrstft_loss: waveform lengths differ");
  if (cfg.resolutions.empty()) throw std::invalid_argument("mrstft_loss: no resolutions configured");
  std::vector<MrStftTerms> out;
  for (const auto& params : cfg.resolutions) {
    const auto s = stft(ref, params);
    const auto e = stft(est, params);
    double diff = 0.0, norm = 0.0, logsum = 0.0;
    for (std::size_t i = 0; i < s.bins.size(); ++i) {
      const double ms = std::max(std::abs(s.bins[i]), kMrStftFloor);
      const double me = std::max(std::abs(e.bins[i]), kMrStftFloor);
      diff += (ms - me) * (ms - me);
      norm += ms * ms;
      logsum += std::abs(std::log(ms / me));
    }
    out.push_back({std::sqrt(diff) / std::sqrt(norm), logsum / s.num_frames});
  }
  return out;
}

double mrstft_loss(const Waveform& ref, const Waveform& est, const MrStftConfig& cfg) {
  double total = 0.0;
  for (const auto& t : mrstft_terms(ref, est, cfg)) total += t.total();
  return total;
}

double mrstft_loss_and_grad(const std::vector<double>& ref, const std::vector<double>& est, int sample_rate,
                            const MrStftConfig& cfg, std::vector<double>& grad_est) {
  if (ref.size() != est.size()) throw std::invalid_argument("mrstft_loss: waveform lengths differ");
  const Waveform wr{ref, sample_rate};
  const Waveform we{est, sample_rate};
  grad_est.assign(est.size(), 0.0);
  double total = 0.0;
  for (const auto& params : cfg.resolutions) {
    const auto s = stft(wr, params);
    const auto e = stft(we, params);
    const int nfft = params.fft_size;
    const int nb = s.num_bins;
    double diff_sq = 0.0, norm_sq = 0.0, logsum = 0.0;
    std::vector<double> ms(s.bins.size()), me(s.bins.size());
    for (std::size_t i = 0; i < s.bins.size(); ++i) {
      ms[i] = std::max(std::abs(s.bins[i]), kMrStftFloor);
      me[i] = std::max(std::abs(e.bins[i]), kMrStftFloor);
      diff_sq += (ms[i] - me[i]) * (ms[i] - me[i]);
      norm_sq += ms[i] * ms[i];
      logsum += std::abs(std::log(ms[i] / me[i]));
    }
    const double diff = std::sqrt(diff_sq);
    const double norm = std::sqrt(norm_sq);
    total += diff / norm + logsum / s.num_frames;

    // dL/d|E| per bin; zero where the floor is active.
    const FftPlan plan(static_cast<std::size_t>(nfft));
    const auto window = hann_window(nfft);
    const long pad = nfft / 2;
    std::vector<Complex> buf(static_cast<std::size_t>(nfft));
    for (int t = 0; t < s.num_frames; ++t) {
      std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
      for (int f = 0; f < nb; ++f) {
        const std::size_t i = static_cast<std::size_t>(t) * nb + f;
        const double raw = std::abs(e.bins[i]);
        if (raw <= kMrStftFloor) continue;
        double g = 0.0;
        if (diff > 0.0) g += (me[i] - ms[i]) / (diff * norm);
        const double lr = std::log(ms[i] / me[i]);
        if (lr != 0.0) g += (lr > 0.0 ? -1.0 : 1.0) / (me[i] * s.num_frames);
        // The loss counts each one-sided bin once, so mirror bins contribute nothing.
        buf[f] = g * e.bins[i] / raw;
      }
      // dL/dx_n = w_n * Re(sum_k G_k e^{+2 pi i k n / N}) over the one-sided bins.
      plan.transform(buf, true);
      const long start = static_cast<long>(t) * params.hop - pad;
      for (int n = 0; n < nfft; ++n) {
        grad_est[reflect_index(start + n, est.size())] += window[n] * buf[n].real();
      }
    }
  }
  return total;
}

}  // namespace bridgesr
