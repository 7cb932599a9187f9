#pragma once

#include <cmath>
#include <complex>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/hp_complex.hpp"

namespace beurling {

template <class C>
struct NewtonResult {
  C root;
  int iterations = 0;
  double residual = 0;  // |f(root)|
  double scale = 0;     // |df(root)|
};

namespace detail {
inline double mag(const cplx& z) { return std::abs(z); }
inline double mag(const HpComplex& z) { return to_double(abs(z)); }
inline bool finite_c(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
inline bool finite_c(const HpComplex& z) {
  return boost::multiprecision::isfinite(z.re) && boost::multiprecision::isfinite(z.im);
}
}  // namespace detail

// Plain Newton; success means |f(s)| ≤ tol·|df(s)|.
template <class C, class F, class DF>
NewtonResult<C> newton_complex(F&& f, DF&& df, C s, double tol, int max_iter) {
  NewtonResult<C> out{s, 0, 0, 0};
  for (int it = 0; it <= max_iter; ++it) {
    C fv = f(s);
    C dv = df(s);
    if (!detail::finite_c(fv) || !detail::finite_c(dv)) fail(ErrorKind::NonFinite, "newton_complex evaluation");
    double r = detail::mag(fv), d = detail::mag(dv);
    out.root = s;
    out.iterations = it;
    out.residual = r;
    out.scale = d;
    if (r <= tol * d) return out;
    if (d < 1e-300) fail(ErrorKind::DerivativeVanished, "|df| underflow");
    if (it == max_iter) break;
    s = s - fv / dv;
  }
  fail(ErrorKind::NoConvergence,
       "newton_complex: residual " + std::to_string(out.residual) + " after " + std::to_string(max_iter) + " iterations");
}

}  // namespace beurling
