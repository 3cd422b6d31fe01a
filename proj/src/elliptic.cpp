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

#include "bridgesr/elliptic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace bridgesr::elliptic {

namespace {

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

using Cplx = std::complex<double>;

Cplx complement(Cplx kx) { return std::sqrt((1.0 - kx) * (1.0 + kx)); }

// Inverse Jacobian sn via descending Landen transformations.
Cplx arc_jac_sn(Cplx w, double m) {
  const double k = std::sqrt(m);
  if (k > 1.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  if (k == 1.0) return std::atanh(w);

  std::vector<double> ks{k};
  for (int iter = 0; ks.back() != 0.0; ++iter) {
    if (iter > 10) throw std::runtime_error("arc_jac_sn: Landen transformation did not converge");
    const double kp = std::sqrt((1.0 - ks.back()) * (1.0 + ks.back()));
    ks.push_back((1.0 - kp) / (1.0 + kp));
  }
  double big_k = std::numbers::pi / 2.0;
  for (std::size_t i = 1; i < ks.size(); ++i) big_k *= 1.0 + ks[i];

  Cplx wn = w;
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    wn = 2.0 * wn / ((1.0 + ks[i + 1]) * (1.0 + complement(ks[i] * wn)));
  }
  return big_k * (2.0 / std::numbers::pi) * std::asin(wn);
}

}  // namespace

double ellipk(double m) {
  if (m < 0.0 || m >= 1.0) throw std::domain_error("ellipk: m outside [0, 1)");
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt(1.0 - m)));
}

double ellipkm1(double p) {
  if (p <= 0.0 || p > 1.0) throw std::domain_error("ellipkm1: p outside (0, 1]");
  return std::numbers::pi / (2.0 * agm(1.0, std::sqrt(p)));
}

JacobiValues ellipj(double u, double m) {
  if (m < 0.0 || m > 1.0) throw std::domain_error("ellipj: m outside [0, 1]");
  JacobiValues r{};
  if (m < 1e-9) {
    const double t = std::sin(u), b = std::cos(u);
    const double ai = 0.25 * m * (u - t * b);
    r.sn = t - ai * b;
    r.cn = b + ai * t;
    r.phi = u - ai;
    r.dn = 1.0 - 0.5 * m * t * t;
    return r;
  }
  if (m >= 0.9999999999) {
    double ai = 0.25 * (1.0 - m);
    const double b = std::cosh(u), t = std::tanh(u);
    const double phi = 1.0 / b;
    const double twon = b * std::sinh(u);
    r.sn = t + ai * (twon - u) / (b * b);
    r.phi = 2.0 * std::atan(std::exp(u)) - std::numbers::pi / 2.0 + ai * (twon - u) / b;
    ai *= t * phi;
    r.cn = phi - ai * (twon - u);
    r.dn = phi + ai * (twon + u);
    return r;
  }
  double a[9], c[9];
  a[0] = 1.0;
  double b = std::sqrt(1.0 - m);
  c[0] = std::sqrt(m);
  double twon = 1.0;
  int i = 0;
  while (std::abs(c[i] / a[i]) > std::numeric_limits<double>::epsilon()) {
    if (i > 7) break;
    const double ai = a[i];
    ++i;
    c[i] = 0.5 * (ai - b);
    const double t = std::sqrt(ai * b);
    a[i] = 0.5 * (ai + b);
    b = t;
    twon *= 2.0;
  }
  double phi = twon * a[i] * u;
  double prev = phi;
  do {
    const double t = c[i] * std::sin(phi) / a[i];
    prev = phi;
    phi = 0.5 * (std::asin(t) + phi);
  } while (--i);
  r.sn = std::sin(phi);
  r.cn = std::cos(phi);
  r.dn = r.cn / std::cos(phi - prev);
  r.phi = phi;
  return r;
}

double ellipdeg(int n, double m1) {
  constexpr int kTerms = 7;
  const double k1 = ellipk(m1);
  const double k1p = ellipkm1(m1);
  const double q1 = std::exp(-std::numbers::pi * k1p / k1);
  const double q = std::pow(q1, 1.0 / n);
  double num = 0.0;
  for (int i = 0; i <= kTerms; ++i) num += std::pow(q, i * (i + 1));
  double den = 0.0;
  for (int i = 1; i <= kTerms + 1; ++i) den += std::pow(q, i * i);
  den = 1.0 + 2.0 * den;
  return 16.0 * q * std::pow(num / den, 4);
}

double arc_jac_sc1(double w, double m) {
  const Cplx z = arc_jac_sn(Cplx(0.0, w), m);
  if (std::abs(z.real()) > 1e-14) throw std::runtime_error("arc_jac_sc1: unexpected real part");
  return z.imag();
}

}  // namespace bridgesr::elliptic
