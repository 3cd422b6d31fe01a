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

#include <cstddef>
#include <string>
#include <vector>

namespace bridgesr {

/// Dense rank-3 array laid out as [batch][channel][time], row-major.
struct Tensor {
  int b = 0;
  int c = 0;
  int t = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int batch, int channels, int time, double fill = 0.0)
      : b(batch), c(channels), t(time), data(static_cast<std::size_t>(batch) * channels * time, fill) {}

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return b == o.b && c == o.c && t == o.t; }
  std::string shape_string() const;

  double& operator()(int i, int ch, int k) { return data[(static_cast<std::size_t>(i) * c + ch) * t + k]; }
  double operator()(int i, int ch, int k) const { return data[(static_cast<std::size_t>(i) * c + ch) * t + k]; }

  double* row(int i, int ch) { return data.data() + (static_cast<std::size_t>(i) * c + ch) * t; }
  const double* row(int i, int ch) const { return data.data() + (static_cast<std::size_t>(i) * c + ch) * t; }
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* what);
bool all_finite(const Tensor& x);

/// Batch item i as a 1 x c x t tensor.
Tensor batch_item(const Tensor& x, int i);
/// Stack equally shaped 1 x c x t tensors along the batch axis.
Tensor stack_batch(const std::vector<Tensor>& items);
/// Time slice [start, start + len) of every row.
Tensor slice_time(const Tensor& x, int start, int len);

}  // namespace bridgesr
