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

#include <span>
#include <vector>

namespace bridgesr {

/// Least-squares polynomial smoothing over a sliding odd-length window. The
/// first and last window/2 samples are evaluated on the polynomial fitted to
/// the edge window, so polynomials of degree <= polyorder pass through
/// unchanged everywhere. Throws if the sequence is shorter than the window.
std::vector<double> savgol_smooth(std::span<const double> x, int window, int polyorder);

/// Weights that evaluate the degree-`polyorder` fit of a length-`window`
/// block at offset `pos` (0 = first sample of the block).
std::vector<double> savgol_weights(int window, int polyorder, int pos);

}  // namespace bridgesr
