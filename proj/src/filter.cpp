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

#include "bridgesr/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bridgesr/elliptic.hpp"

namespace bridgesr {

using Cplx = std::complex<double>;

namespace {

struct Zpk {
  std::vector<Cplx> zeros;
  std::vector<Cplx> poles;
};

// Prototypes are normalised to a 1 rad/s cutoff. Gains are irrelevant here
// because the digital sections are renormalised to unity DC gain.

Zpk butterworth_prototype(int n) {
  Zpk out;
  for (int m = -n + 1; m < n; m += 2) {
    out.poles.push_back(-std::exp(Cplx(0.0, std::numbers::pi * m / (2.0 * n))));
  }
  return out;
}

Zpk chebyshev1_prototype(int n, double ripple_db) {
  const double eps = std::sqrt(std::pow(10.0, 0.1 * ripple_db) - 1.0);
  const double mu = std::asinh(1.0 / eps) / n;
  Zpk out;
  for (int m = -n + 1; m < n; m += 2) {
    const double theta = std::numbers::pi * m / (2.0 * n);
    out.poles.push_back(-std::sinh(Cplx(mu, theta)));
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Aberth-Ehrlich simultaneous root finder for a monic-or-not polynomial with
// coefficients c[0] + c[1] x + ... + c[n] x^n.
std::vector<Cplx> polynomial_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<Cplx> roots(n);
  for (int i = 0; i < n; ++i) {
    roots[i] = std::polar(1.1, 2.0 * std::numbers::pi * (i + 0.25) / n + 0.4);
  }
  auto eval = [&](Cplx x, Cplx& dp) {
    Cplx p = c[n];
    dp = 0.0;
    for (int k = n - 1; k >= 0; --k) {
      dp = dp * x + p;
      p = p * x + c[k];
    }
    return p;
  };
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      Cplx dp;
      const Cplx p = eval(roots[i], dp);
      const Cplx ratio = p / dp;
      Cplx repulse = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) repulse += 1.0 / (roots[i] - roots[j]);
      }
      const Cplx step = ratio / (1.0 - ratio * repulse);
      roots[i] -= step;
      worst = std::max(worst, std::abs(step) / std::max(1.0, std::abs(roots[i])));
    }
    if (worst < 1e-15) break;
  }
  return roots;
}

// Bessel prototype normalised so that |H(j1)| = 1/sqrt(2).
Zpk bessel_prototype(int n) {
  // Reverse Bessel polynomial theta_n(s) = sum a_k s^k.
  std::vector<double> a(n + 1);
  for (int k = 0; k <= n; ++k) {
    a[k] = factorial(2 * n - k) / (std::pow(2.0, n - k) * factorial(k) * factorial(n - k));
  }
  // Rescale s = c u with c = a0^(1/n) to get well-conditioned coefficients.
  const double c = std::pow(a[0], 1.0 / n);
  std::vector<double> b(n + 1);
  for (int k = 0; k <= n; ++k) b[k] = a[k] * std::pow(c, k) / a[0];
  std::vector<Cplx> poles = polynomial_roots(b);
  for (auto& p : poles) p *= c;

  auto mag_sq = [&](double w) {
    Cplx h = 1.0;
    for (const auto& p : poles) h *= -p / (Cplx(0.0, w) - p);
    return std::norm(h);
  };
  double lo = 0.0, hi = 1.0;
  while (mag_sq(hi) > 0.5) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mag_sq(mid) > 0.5 ? lo : hi) = mid;
  }
  const double w3 = 0.5 * (lo + hi);
  Zpk out;
  for (auto p : poles) {
    p /= w3;
    if (std::abs(p.imag()) < 1e-10 * std::abs(p)) p = Cplx(p.real(), 0.0);
    out.poles.push_back(p);
  }
  return out;
}

Zpk elliptic_prototype(int n, double rp, double rs) {
  Zpk out;
  const double eps_sq = std::pow(10.0, 0.1 * rp) - 1.0;
  if (n == 1) {
    out.poles.push_back(Cplx(-std::sqrt(1.0 / eps_sq), 0.0));
    return out;
  }
  const double eps = std::sqrt(eps_sq);
  const double ck1_sq = eps_sq / (std::pow(10.0, 0.1 * rs) - 1.0);
  const double k_ck1 = elliptic::ellipk(ck1_sq);
  const double m = elliptic::ellipdeg(n, ck1_sq);
  const double capk = elliptic::ellipk(m);

  const double r = elliptic::arc_jac_sc1(1.0 / eps, ck1_sq);
  const double v0 = capk * r / (n * k_ck1);
  const auto sv = elliptic::ellipj(v0, 1.0 - m);

  for (int j = 1 - n % 2; j < n; j += 2) {
    const auto e = elliptic::ellipj(j * capk / n, m);
    if (std::abs(e.sn) > 1e-12) {
      const Cplx z(0.0, 1.0 / (std::sqrt(m) * e.sn));
      out.zeros.push_back(z);
      out.zeros.push_back(std::conj(z));
    }
    const Cplx p = -(Cplx(e.cn * e.dn * sv.sn * sv.cn, e.sn * sv.dn)) /
                   (1.0 - (e.dn * sv.sn) * (e.dn * sv.sn));
    if (std::abs(p.imag()) > 1e-12 * std::abs(p)) {
      out.poles.push_back(p);
      out.poles.push_back(std::conj(p));
    } else {
      out.poles.push_back(Cplx(p.real(), 0.0));
    }
  }
  return out;
}

Zpk analog_prototype(const FilterSpec& spec) {
  switch (spec.family) {
    case FilterFamily::Butterworth: return butterworth_prototype(spec.order);
    case FilterFamily::Chebyshev1: return chebyshev1_prototype(spec.order, spec.ripple_db);
    case FilterFamily::Bessel: return bessel_prototype(spec.order);
    case FilterFamily::Elliptic: return elliptic_prototype(spec.order, spec.ripple_db, spec.stop_atten_db);
  }
  throw std::logic_error("unknown filter family");
}

Zpk bilinear(const Zpk& analog, double warped, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk out;
  for (auto z : analog.zeros) out.zeros.push_back((fs2 + z * warped) / (fs2 - z * warped));
  for (auto p : analog.poles) out.poles.push_back((fs2 + p * warped) / (fs2 - p * warped));
  while (out.zeros.size() < out.poles.size()) out.zeros.push_back(Cplx(-1.0, 0.0));
  return out;
}

// Splits roots into one representative per conjugate pair (imag > 0) and real roots.
void split_roots(const std::vector<Cplx>& roots, std::vector<Cplx>& pairs, std::vector<double>& reals) {
  for (const auto& r : roots) {
    const double tol = 1e-9 * std::max(1.0, std::abs(r));
    if (std::abs(r.imag()) <= tol) {
      reals.push_back(r.real());
    } else if (r.imag() > 0.0) {
      pairs.push_back(r);
    }
  }
}

Biquad normalise_dc(Biquad s) {
  const double num = s.b0 + s.b1 + s.b2;
  const double den = 1.0 + s.a1 + s.a2;
  const double g = num / den;
  s.b0 /= g;
  s.b1 /= g;
  s.b2 /= g;
  return s;
}

SosCascade group_sections(const Zpk& digital) {
  std::vector<Cplx> pole_pairs, zero_pairs;
  std::vector<double> real_poles, real_zeros;
  split_roots(digital.poles, pole_pairs, real_poles);
  split_roots(digital.zeros, zero_pairs, real_zeros);

  struct PoleGroup {
    std::vector<Cplx> poles;  // one (first order), or two
    double radius;
  };
  std::vector<PoleGroup> groups;
  for (const auto& p : pole_pairs) groups.push_back({{p, std::conj(p)}, std::abs(p)});
  std::sort(real_poles.begin(), real_poles.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    groups.push_back({{real_poles[i], real_poles[i + 1]},
                      std::max(std::abs(real_poles[i]), std::abs(real_poles[i + 1]))});
  }
  const bool has_first_order = real_poles.size() % 2 == 1;
  std::sort(groups.begin(), groups.end(), [](const PoleGroup& a, const PoleGroup& b) { return a.radius > b.radius; });

  SosCascade sos;
  if (has_first_order) {
    if (real_zeros.empty()) throw std::logic_error("filter: no real zero for first-order section");
    const double p = real_poles.back();
    const double z = real_zeros.back();
    real_zeros.pop_back();
    sos.push_back(normalise_dc({1.0, -z, 0.0, -p, 0.0}));
  }
  for (const auto& g : groups) {
    Cplx z1, z2;
    if (!zero_pairs.empty()) {
      auto best = std::min_element(zero_pairs.begin(), zero_pairs.end(), [&](const Cplx& a, const Cplx& b) {
        return std::abs(a - g.poles[0]) < std::abs(b - g.poles[0]);
      });
      z1 = *best;
      z2 = std::conj(*best);
      zero_pairs.erase(best);
    } else {
      if (real_zeros.size() < 2) throw std::logic_error("filter: zero/pole count mismatch");
      z1 = real_zeros.back();
      real_zeros.pop_back();
      z2 = real_zeros.back();
      real_zeros.pop_back();
    }
    const Cplx p1 = g.poles[0], p2 = g.poles[1];
    Biquad s;
    s.b0 = 1.0;
    s.b1 = -(z1 + z2).real();
    s.b2 = (z1 * z2).real();
    s.a1 = -(p1 + p2).real();
    s.a2 = (p1 * p2).real();
    sos.push_back(normalise_dc(s));
  }
  return sos;
}

void validate_spec(const FilterSpec& spec, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("filter: sample rate must be positive");
  if (spec.order < 1 || spec.order > kMaxFilterOrder) {
    throw std::invalid_argument("filter: order " + std::to_string(spec.order) + " outside [1, 16]");
  }
  if (!(spec.cutoff_hz > 0.0) || !(spec.cutoff_hz < 0.5 * sample_rate)) {
    throw std::invalid_argument("filter: cutoff " + std::to_string(spec.cutoff_hz) +
                                " Hz must lie strictly inside (0, Nyquist)");
  }
  if ((spec.family == FilterFamily::Chebyshev1 || spec.family == FilterFamily::Elliptic) && !(spec.ripple_db > 0.0)) {
    throw std::invalid_argument("filter: ripple_db must be positive");
  }
  if (spec.family == FilterFamily::Elliptic && !(spec.stop_atten_db > spec.ripple_db)) {
    throw std::invalid_argument("filter: stop_atten_db must exceed ripple_db");
  }
}

}  // namespace

std::string to_string(FilterFamily family) {
  switch (family) {
    case FilterFamily::Chebyshev1: return "chebyshev1";
    case FilterFamily::Butterworth: return "butterworth";
    case FilterFamily::Bessel: return "bessel";
    case FilterFamily::Elliptic: return "elliptic";
  }
  return "?";
}

FilterFamily parse_filter_family(const std::string& name) {
  if (name == "chebyshev1" || name == "cheby1") return FilterFamily::Chebyshev1;
  if (name == "butterworth" || name == "butter") return FilterFamily::Butterworth;
  if (name == "bessel") return FilterFamily::Bessel;
  if (name == "elliptic" || name == "ellip") return FilterFamily::Elliptic;
  throw std::invalid_argument("unknown filter family '" + name + "'");
}

SosCascade design_lowpass(const FilterSpec& spec, int sample_rate) {
  validate_spec(spec, sample_rate);
  const double fs = sample_rate;
  const double warped = 2.0 * fs * std::tan(std::numbers::pi * spec.cutoff_hz / fs);
  const Zpk digital = bilinear(analog_prototype(spec), warped, fs);
  SosCascade sos = group_sections(digital);
  if (max_pole_radius(sos) >= 1.0 - 1e-9) {
    throw std::logic_error("filter: designed cascade is not stable");
  }
  return sos;
}

std::complex<double> frequency_response(const SosCascade& sos, double freq_hz, int sample_rate) {
  const Cplx zinv = std::exp(Cplx(0.0, -2.0 * std::numbers::pi * freq_hz / sample_rate));
  Cplx h = 1.0;
  for (const auto& s : sos) {
    h *= (s.b0 + zinv * (s.b1 + zinv * s.b2)) / (1.0 + zinv * (s.a1 + zinv * s.a2));
  }
  return h;
}

double magnitude_db(const SosCascade& sos, double freq_hz, int sample_rate) {
  return 20.0 * std::log10(std::abs(frequency_response(sos, freq_hz, sample_rate)));
}

double max_pole_radius(const SosCascade& sos) {
  double r = 0.0;
  for (const auto& s : sos) {
    // Roots of z^2 + a1 z + a2.
    const Cplx disc = std::sqrt(Cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) * 0.5), std::abs((-s.a1 - disc) * 0.5)});
  }
  return r;
}

namespace {

void run_cascade(std::vector<double>& x, const SosCascade& sos, bool steady_state_init) {
  for (const auto& s : sos) {
    double s1 = 0.0, s2 = 0.0;
    if (steady_state_init && !x.empty()) {
      const double c = x.front();
      s2 = (s.b2 - s.a2) * c;
      s1 = (s.b1 - s.a1) * c + s2;
    }
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + s1;
      s1 = s.b1 * in - s.a1 * out + s2;
      s2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

Waveform apply_filter(const Waveform& wav, const SosCascade& sos, FilterMode mode) {
  Waveform out{wav.samples, wav.sample_rate};
  if (wav.empty() || sos.empty()) return out;
  if (mode == FilterMode::Causal) {
    run_cascade(out.samples, sos, false);
    return out;
  }
  const std::size_t n = wav.size();
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sos.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  const auto& x = wav.samples;
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  run_cascade(ext, sos, true);
  std::reverse(ext.begin(), ext.end());
  run_cascade(ext, sos, true);
  std::reverse(ext.begin(), ext.end());
  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n),
            out.samples.begin());
  return out;
}

Waveform lowpass(const Waveform& wav, const FilterSpec& spec, FilterMode mode) {
  return apply_filter(wav, design_lowpass(spec, wav.sample_rate), mode);
}

}  // namespace bridgesr
