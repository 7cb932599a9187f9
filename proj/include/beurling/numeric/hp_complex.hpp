#pragma once

#include <complex>

#include "beurling/numeric/precision.hpp"

namespace beurling {

using cplx = std::complex<double>;

// Complex number over mpfr reals; mpc is not available.
struct HpComplex {
  Real re = 0;
  Real im = 0;

  HpComplex() = default;
  HpComplex(Real r, Real i = Real(0)) : re(std::move(r)), im(std::move(i)) {}
  explicit HpComplex(cplx z) : re(z.real()), im(z.imag()) {}

  cplx to_cplx() const { return {to_double(re), to_double(im)}; }

  HpComplex& operator+=(const HpComplex& o) { re += o.re; im += o.im; return *this; }
  HpComplex& operator-=(const HpComplex& o) { re -= o.re; im -= o.im; return *this; }
  HpComplex& operator*=(const HpComplex& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  HpComplex& operator/=(const HpComplex& o) {
    Real d = o.re * o.re + o.im * o.im;
    Real r = (re * o.re + im * o.im) / d;
    im = (im * o.re - re * o.im) / d;
    re = std::move(r);
    return *this;
  }
};

inline HpComplex operator+(HpComplex a, const HpComplex& b) { return a += b; }
inline HpComplex operator-(HpComplex a, const HpComplex& b) { return a -= b; }
inline HpComplex operator*(HpComplex a, const HpComplex& b) { return a *= b; }
inline HpComplex operator/(HpComplex a, const HpComplex& b) { return a /= b; }
inline HpComplex operator-(const HpComplex& a) { return {-a.re, -a.im}; }
inline HpComplex operator*(const Real& s, const HpComplex& a) { return {s * a.re, s * a.im}; }

inline Real abs(const HpComplex& z) { return boost::multiprecision::hypot(z.re, z.im); }
inline Real arg(const HpComplex& z) { return boost::multiprecision::atan2(z.im, z.re); }

inline HpComplex exp(const HpComplex& z) {
  Real m = boost::multiprecision::exp(z.re);
  return {m * boost::multiprecision::cos(z.im), m * boost::multiprecision::sin(z.im)};
}

inline HpComplex log(const HpComplex& z) { return {boost::multiprecision::log(abs(z)), arg(z)}; }

inline HpComplex reciprocal(const HpComplex& z) { return HpComplex(Real(1)) / z; }

}  // namespace beurling
