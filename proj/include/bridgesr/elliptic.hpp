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

// Jacobi elliptic functions and complete integrals needed by the elliptic
// (Cauer) low-pass prototype. Parameter convention: m = k^2.

namespace bridgesr::elliptic {

/// Complete elliptic integral of the first kind K(m), 0 <= m < 1.
double ellipk(double m);

/// K(1 - p), accurate for small p.
double ellipkm1(double p);

struct JacobiValues {
  double sn, cn, dn, phi;
};

/// sn, cn, dn and amplitude of u with parameter m in [0, 1].
JacobiValues ellipj(double u, double m);

/// Solves the degree equation for the elliptic parameter of an order-n filter.
double ellipdeg(int n, double m1);

/// Inverse Jacobian sc with complementary parameter: real z with sc(z, 1 - m) = w.
double arc_jac_sc1(double w, double m);

}  // namespace bridgesr::elliptic
