#pragma once

#include <cmath>
#include <utility>

#include "beurling/numeric/errors.hpp"

namespace beurling {

template <class T>
struct RootResult {
  T x;
  T lo;
  T hi;
  int iterations = 0;
};

namespace detail {
template <class T>
bool finite_val(const T& v) {
  using std::isfinite;
  return static_cast<bool>(isfinite(v));
}
template <class T>
T abs_val(const T& v) {
  using std::abs;
  return abs(v);
}
}  // namespace detail

// Bisection to ~10 safe digits, then Illinois secant kept inside the bracket.
// Works for double and for mpfr Real.
template <class T, class F>
RootResult<T> find_root_bracketed_ex(F&& f, T lo, T hi, const T& tol) {
  if (hi < lo) std::swap(lo, hi);
  T flo = f(lo), fhi = f(hi);
  if (!detail::finite_val(flo) || !detail::finite_val(fhi)) fail(ErrorKind::NonFinite, "bracket endpoint value");
  RootResult<T> res{lo, lo, hi, 0};
  if (flo == 0) { res.x = lo; res.hi = lo; return res; }
  if (fhi == 0) { res.x = hi; res.lo = hi; return res; }
  if ((flo > 0) == (fhi > 0)) fail(ErrorKind::NoSignChange, "f(lo) and f(hi) have the same sign");
  T scale = detail::abs_val(lo) + detail::abs_val(hi);
  T coarse = T(1e-10) * scale;
  if (coarse < tol) coarse = tol;
  int it = 0;
  while (hi - lo > coarse && it < 4000) {
    T mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    T fm = f(mid);
    if (!detail::finite_val(fm)) fail(ErrorKind::NonFinite, "f(mid)");
    ++it;
    if (fm == 0) { lo = hi = mid; flo = fhi = fm; break; }
    if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
  }
  int side = 0;
  while (hi - lo > tol && it < 8000) {
    T x = (lo * fhi - hi * flo) / (fhi - flo);
    T w = hi - lo;
    if (!(x > lo && x < hi)) x = lo + w / 2;
    if (x <= lo || x >= hi) break;
    T fx = f(x);
    if (!detail::finite_val(fx)) fail(ErrorKind::NonFinite, "f(secant)");
    ++it;
    if (fx == 0) { lo = hi = x; break; }
    if ((fx > 0) == (flo > 0)) {
      lo = x; flo = fx;
      if (side == -1) fhi /= 2;
      side = -1;
    } else {
      hi = x; fhi = fx;
      if (side == 1) flo /= 2;
      side = 1;
    }
    if (hi - lo > w / 2) {
      T mid = lo + (hi - lo) / 2;
      T fm = f(mid);
      ++it;
      if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
    }
  }
  res.lo = lo;
  res.hi = hi;
  res.x = detail::abs_val(flo) < detail::abs_val(fhi) ? lo : hi;
  if (lo == hi) res.x = lo;
  res.iterations = it;
  return res;
}

template <class T, class F>
T find_root_bracketed(F&& f, T lo, T hi, const T& tol) {
  return find_root_bracketed_ex<T>(std::forward<F>(f), lo, hi, tol).x;
}

}  // namespace beurling
