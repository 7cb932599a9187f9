#pragma once

#include <cmath>
#include <numbers>

#include "beurling/numeric/precision.hpp"

namespace beurling {

struct Reduced {
  double r = 0;        // in [0, 2π)
  double error = 0;    // estimate of |true residue − r|
};

// x − r ∈ 2πZ to working precision. Needs bits(x) ≥ log2|x| + 64.
inline Reduced reduce_mod_2pi(const Real& x) {
  unsigned bits = bits_of(x);
  double lg = log2_abs(x);
  if (!boost::multiprecision::isfinite(x)) fail(ErrorKind::NonFinite, "reduce_mod_2pi of non-finite value");
  if (x != 0 && lg + 64 > static_cast<double>(bits))
    fail(ErrorKind::InsufficientPrecision,
         "need " + std::to_string(static_cast<long>(std::ceil(lg + 64))) + " bits, have " + std::to_string(bits));
  PrecisionGuard g(bits);
  Real tp = hp_two_pi();
  Real n = boost::multiprecision::floor(x / tp);
  Real r = x - n * tp;
  if (r < 0) r += tp;
  if (r >= tp) r -= tp;
  Reduced out;
  out.r = to_double(r);
  if (out.r >= 2 * std::numbers::pi) out.r = 0;
  double scale = std::max(1.0, std::exp2(std::max(lg, 0.0)));
  out.error = scale * std::ldexp(1.0, -static_cast<int>(bits) + 2) + 4e-16 * out.r;
  return out;
}

// Full-precision residue in [0, 2π).
inline Real reduce_mod_2pi_hp(const Real& x) {
  unsigned bits = bits_of(x);
  double lg = log2_abs(x);
  if (x != 0 && lg + 64 > static_cast<double>(bits))
    fail(ErrorKind::InsufficientPrecision, "reduce_mod_2pi_hp: precision too low");
  PrecisionGuard g(bits);
  Real tp = hp_two_pi();
  Real r = x - boost::multiprecision::floor(x / tp) * tp;
  if (r < 0) r += tp;
  return r;
}

// Residue in (−π, π].
inline double wrap_pi(double a) {
  double r = std::remainder(a, 2 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2 * std::numbers::pi;
  return r;
}

// Distance from a to offset + 2πZ, in [0, π].
inline double dist_to_lattice(double a, double offset) { return std::fabs(wrap_pi(a - offset)); }

}  // namespace beurling
