#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cfloat>
#include <cmath>
#include <string>

#include "beurling/numeric/errors.hpp"

namespace beurling {

using Real = boost::multiprecision::mpfr_float;

struct PrecisionContext {
  unsigned bits = 256;
  double eps_machine = DBL_EPSILON / 2;
};

inline unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

inline unsigned bits_of(const Real& x) {
  return static_cast<unsigned>(mpfr_get_prec(x.backend().data()));
}

// Sets the thread's default mpfr precision for the lifetime of the guard.
class PrecisionGuard {
 public:
  explicit PrecisionGuard(unsigned bits) : saved_(Real::default_precision()) {
    Real::default_precision(digits10_for_bits(bits));
  }
  ~PrecisionGuard() { Real::default_precision(saved_); }
  PrecisionGuard(const PrecisionGuard&) = delete;
  PrecisionGuard& operator=(const PrecisionGuard&) = delete;

 private:
  unsigned saved_;
};

inline Real hp_pi() { return boost::multiprecision::mpfr_float(boost::math::constants::pi<Real>()); }
inline Real hp_two_pi() { return 2 * hp_pi(); }

inline Real hp_from_string(const std::string& s) { return Real(s); }

// Decimal string with enough digits to round-trip the current value.
inline std::string hp_to_string(const Real& x) {
  unsigned d = digits10_for_bits(bits_of(x)) + 2;
  return x.str(static_cast<std::streamsize>(d), std::ios_base::scientific);
}

inline double log2_abs(const Real& x) {
  if (x == 0) return -INFINITY;
  long e = 0;
  double m = mpfr_get_d_2exp(&e, x.backend().data(), MPFR_RNDN);
  return std::log2(std::fabs(m)) + static_cast<double>(e);
}

inline double to_double(const Real& x) { return x.convert_to<double>(); }

}  // namespace beurling
