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

#include "bridgesr/savgol.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace bridgesr {

std::vector<double> savgol_weights(int window, int polyorder, int pos) {
  const int cols = polyorder + 1;
  const double centre = 0.5 * (window - 1);
  const double scale = std::max(1.0, centre);
  Eigen::MatrixXd design(window, cols);
  for (int i = 0; i < window; ++i) {
    const double u = (i - centre) / scale;
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      design(i, j) = p;
      p *= u;
    }
  }
  const Eigen::MatrixXd pinv =
      design.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
  Eigen::RowVectorXd at(cols);
  const double u = (pos - centre) / scale;
  double p = 1.0;
  for (int j = 0; j < cols; ++j) {
    at(j) = p;
    p *= u;
  }
  const Eigen::RowVectorXd w = at * pinv;
  return {w.data(), w.data() + w.size()};
}

std::vector<double> savgol_smooth(std::span<const double> x, int window, int polyorder) {
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("savgol: window must be odd and positive");
  if (polyorder < 0 || polyorder >= window) throw std::invalid_argument("savgol: need 0 <= polyorder < window");
  if (x.size() < static_cast<std::size_t>(window)) {
    throw std::invalid_argument("savgol: sequence of length " + std::to_string(x.size()) +
                                " is shorter than the window " + std::to_string(window));
  }
  const int half = window / 2;
  const std::size_t n = x.size();
  std::vector<double> out(n);

  const auto centre = savgol_weights(window, polyorder, half);
  for (std::size_t i = half; i + half < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += centre[j] * x[i - half + j];
    out[i] = acc;
  }
  for (int pos = 0; pos < half; ++pos) {
    const auto w = savgol_weights(window, polyorder, pos);
    double head = 0.0, tail = 0.0;
    for (int j = 0; j < window; ++j) {
      head += w[j] * x[j];
      // Mirror: position window-1-pos of the last block.
      tail += w[window - 1 - j] * x[n - window + j];
    }
    out[pos] = head;
    out[n - 1 - pos] = tail;
  }
  return out;
}

}  // namespace bridgesr
