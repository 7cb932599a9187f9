#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/quadrature.hpp"

namespace beurling {

// P(e^L) = ∫_1^{e^L} (1−1/u)/log u du = Σ_{n≥1} L^n/(n·n!). All terms positive for L ≥ 0.
inline double p_of_log(double L) {
  if (L <= 0) return 0;
  double term = 1, sum = 0;
  for (int n = 1; n < 100000; ++n) {
    term *= L / n;
    double add = term / n;
    sum += add;
    if (n > L && add < 1e-17 * sum) break;
  }
  return sum;
}

// dP in log coordinates: (e^v − 1)/v dv.
inline double p_density_log(double v) { return v == 0 ? 1.0 : std::expm1(v) / v; }

// dP per du: (1 − 1/u)/log u.
inline double p_density(double u) {
  double v = std::log(u);
  return v < 1e-8 ? 1.0 - 0.5 * v : (1 - 1 / u) / v;
}

// e^z E1(z) by the continued fraction 1/(z+1− 1/(z+3− 4/(z+5− …))) (modified Lentz).
inline cplx e1_scaled(cplx z) {
  const double tiny = 1e-300;
  cplx f = tiny, C = f, D = 0;
  for (int n = 1; n < 20000; ++n) {
    cplx a = (n == 1) ? cplx(1) : cplx(-double(n - 1) * double(n - 1));
    cplx b = z + double(2 * n - 1);
    D = b + a * D;
    if (std::abs(D) < tiny) D = tiny;
    C = b + a / C;
    if (std::abs(C) < tiny) C = tiny;
    D = 1.0 / D;
    cplx delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return f;
  }
  fail(ErrorKind::NoConvergence, "e1_scaled continued fraction");
}

// e^w − 1 without cancellation for small |w|.
inline cplx cexpm1(cplx w) {
  if (std::abs(w) > 0.1) return std::exp(w) - 1.0;
  cplx term = w, sum = w;
  for (int n = 2; n < 30; ++n) {
    term *= w / double(n);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

// Ein(z) = ∫_0^z (1 − e^{−w})/w dw, entire.
inline cplx ein(cplx z) {
  double az = std::abs(z);
  if (az <= 8) {
    cplx term = 1, sum = 0;
    for (int n = 1; n < 200; ++n) {
      term *= -z / double(n);
      cplx add = -term / double(n);
      sum += add;
      if (std::abs(add) < 1e-18 * (std::abs(sum) + 1e-300) && n > az) break;
    }
    return sum;
  }
  if (z.real() > 0 || std::fabs(z.imag()) > 2 * std::fabs(z.real()) + 4) {
    return std::exp(-z) * e1_scaled(z) + std::log(z) + euler_gamma;
  }
  // Near the negative real axis: direct quadrature of ∫_0^1 (1 − e^{−zt})/t dt.
  auto g = [z](double t) -> cplx {
    cplx w = z * t;
    if (std::abs(w) < 1e-6) return z * (1.0 - w / 2.0);
    return -cexpm1(-w) / t;
  };
  QuadOptions o;
  o.abs_tol = 0;
  o.rel_tol = 1e-14;
  o.initial_panels = 8 + static_cast<int>(std::fabs(z.imag()));
  return integrate_gk(g, 0.0, 1.0, o).value;
}

}  // namespace beurling
