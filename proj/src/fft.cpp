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

#include "bridgesr/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bridgesr {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");
  bitrev_.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddle_[k] = Complex(std::cos(a), std::sin(a));
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) throw std::invalid_argument("fft: buffer size does not match plan");
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = twiddle_[j * step];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + j];
        const Complex v = data[start + j + half] * w;
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
}

std::vector<Complex> FftPlan::forward_real(std::span<const double> frame) const {
  if (frame.size() != n_) throw std::invalid_argument("fft: frame size does not match plan");
  std::vector<Complex> buf(frame.begin(), frame.end());
  transform(buf);
  buf.resize(n_ / 2 + 1);
  return buf;
}

std::vector<double> FftPlan::inverse_real(std::span<const Complex> half) const {
  if (half.size() != n_ / 2 + 1) throw std::invalid_argument("fft: expected N/2+1 bins");
  std::vector<Complex> buf(n_);
  for (std::size_t k = 0; k <= n_ / 2; ++k) buf[k] = half[k];
  for (std::size_t k = n_ / 2 + 1; k < n_; ++k) buf[k] = std::conj(half[n_ - k]);
  // DC and Nyquist must be real for a real signal.
  buf[0] = Complex(buf[0].real(), 0.0);
  if (n_ > 1) buf[n_ / 2] = Complex(buf[n_ / 2].real(), 0.0);
  transform(buf, true);
  std::vector<double> out(n_);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = buf[i].real() * scale;
  return out;
}

std::vector<Complex> dft(std::span<const Complex> x, bool inverse) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (is_power_of_two(n)) {
    std::vector<Complex> buf(x.begin(), x.end());
    FftPlan(n).transform(buf, inverse);
    return buf;
  }
  // Bluestein: nk = (n^2 + k^2 - (k - n)^2) / 2 turns the DFT into a convolution.
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t sq = (i * i) % (2 * n);  // keeps the angle argument small
    const double a = sign * std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n);
    chirp[i] = Complex(std::cos(a), std::sin(a));
  }
  const std::size_t m = next_power_of_two(2 * n - 1);
  const FftPlan plan(m);
  std::vector<Complex> a(m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i] = x[i] * chirp[i];
  b[0] = std::conj(chirp[0]);
  for (std::size_t i = 1; i < n; ++i) b[i] = b[m - i] = std::conj(chirp[i]);
  plan.transform(a);
  plan.transform(b);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  plan.transform(a, true);
  std::vector<Complex> out(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

}  // namespace bridgesr
