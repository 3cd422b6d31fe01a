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
#include <cstddef>
#include <span>
#include <vector>

namespace bridgesr {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT of a fixed power-of-two size. Twiddles and the
/// bit-reversal table are precomputed, so a plan is cheap to reuse and safe to
/// share between threads (transform() is const).
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  /// Forward: X_k = sum_n x_n e^{-2 pi i k n / N}. Inverse is unnormalised.
  void transform(std::span<Complex> data, bool inverse = false) const;

  /// One-sided spectrum (N/2 + 1 bins) of a real frame of length N.
  std::vector<Complex> forward_real(std::span<const double> frame) const;

  /// Real inverse of a one-sided spectrum, normalised by 1/N so that
  /// inverse_real(forward_real(x)) == x.
  std::vector<double> inverse_real(std::span<const Complex> half) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;
};

/// DFT of any length (Bluestein for non-powers of two). Inverse is unnormalised.
std::vector<Complex> dft(std::span<const Complex> x, bool inverse = false);

}  // namespace bridgesr
