#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "beurling/numeric/hp_complex.hpp"

namespace beurling {

// value = mant · e^{log_scale}; keeps magnitudes like x² representable.
struct SplitComplex {
  cplx mant{0, 0};
  double log_scale = 0;

  static SplitComplex from_log(cplx log_value) {
    SplitComplex s;
    s.log_scale = log_value.real();
    s.mant = std::polar(1.0, log_value.imag());
    return s;
  }

  bool is_zero() const { return mant == cplx(0, 0); }
  double log_abs() const { return is_zero() ? -INFINITY : std::log(std::abs(mant)) + log_scale; }
  double log10_abs() const { return log_abs() / std::numbers::ln10; }
  double phase() const { return std::arg(mant); }

  SplitComplex normalized() const {
    if (is_zero()) return {};
    double m = std::abs(mant);
    return {mant / m, log_scale + std::log(m)};
  }

  // Converts to a plain complex, saturating to ±inf/0.
  cplx to_cplx() const { return mant * std::exp(log_scale); }
  // mant · e^{log_scale − ref}.
  cplx relative_to(double ref) const { return mant * std::exp(log_scale - ref); }
};

inline SplitComplex operator*(const SplitComplex& a, const SplitComplex& b) {
  return SplitComplex{a.mant * b.mant, a.log_scale + b.log_scale}.normalized();
}

inline SplitComplex operator+(const SplitComplex& a, const SplitComplex& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  double ref = std::max(a.log_scale, b.log_scale);
  return SplitComplex{a.relative_to(ref) + b.relative_to(ref), ref}.normalized();
}

inline SplitComplex operator-(const SplitComplex& a) { return {-a.mant, a.log_scale}; }
inline SplitComplex operator-(const SplitComplex& a, const SplitComplex& b) { return a + (-b); }

inline SplitComplex scale(const SplitComplex& a, cplx c) { return SplitComplex{a.mant * c, a.log_scale}.normalized(); }

// log(e^a + e^b) for reals.
inline double log_add_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace beurling
