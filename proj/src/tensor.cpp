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

#include "bridgesr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bridgesr {

std::string Tensor::shape_string() const {
  return "[" + std::to_string(b) + "," + std::to_string(c) + "," + std::to_string(t) + "]";
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " +
                                b.shape_string());
  }
}

bool all_finite(const Tensor& x) {
  return std::all_of(x.data.begin(), x.data.end(), [](double v) { return std::isfinite(v); });
}

Tensor batch_item(const Tensor& x, int i) {
  if (i < 0 || i >= x.b) throw std::out_of_range("batch_item: index out of range");
  Tensor out(1, x.c, x.t);
  const std::size_t n = static_cast<std::size_t>(x.c) * x.t;
  std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(n * i), n, out.data.begin());
  return out;
}

Tensor stack_batch(const std::vector<Tensor>& items) {
  if (items.empty()) throw std::invalid_argument("stack_batch: no items");
  const int c = items[0].c, t = items[0].t;
  Tensor out(0, c, t);
  for (const auto& it : items) {
    if (it.b != 1 || it.c != c || it.t != t) throw std::invalid_argument("stack_batch: inconsistent item shapes");
    out.data.insert(out.data.end(), it.data.begin(), it.data.end());
    ++out.b;
  }
  return out;
}

Tensor slice_time(const Tensor& x, int start, int len) {
  if (start < 0 || len < 0 || start + len > x.t) throw std::out_of_range("slice_time: range outside tensor");
  Tensor out(x.b, x.c, len);
  for (int i = 0; i < x.b; ++i) {
    for (int ch = 0; ch < x.c; ++ch) std::copy_n(x.row(i, ch) + start, len, out.row(i, ch));
  }
  return out;
}

}  // namespace bridgesr
