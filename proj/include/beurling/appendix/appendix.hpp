#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/quadrature.hpp"

namespace beurling {

// dE = dΠ − dP with E(x) = ∫_1^x dE, |E(x)| ≤ C_E x^θ.
// density_log(v) is dE(u)/u per dv at v = log u, i.e. E′(e^v); absent for purely atomic E.
struct DeviationMeasure {
  std::function<double(double)> E;
  std::function<double(double)> density_log;
  double theta = 0;
  double C_E = 1;
  std::vector<double> breakpoints_log;  // jumps of E in v, for b quadrature
  std::string name;

  static DeviationMeasure zero() {
    DeviationMeasure d;
    d.E = [](double) { return 0.0; };
    d.density_log = [](double) { return 0.0; };
    d.C_E = 0;
    d.name = "zero";
    return d;
  }

  // Single atom of weight w at u0 > 1.
  static DeviationMeasure atom(double u0, double w = 1) {
    DeviationMeasure d;
    d.E = [u0, w](double u) { return u >= u0 ? w : 0.0; };
    d.C_E = std::fabs(w);
    d.breakpoints_log = {std::log(u0)};
    d.name = "atom";
    return d;
  }

  // E(u) = u^{1/2} sin(log u): dE/u = e^{−v/2}(sin(v)/2 + cos v) dv.
  // E(u) = u^θ sin(log u).
  static DeviationMeasure toy(double theta = 0.5) {
    DeviationMeasure d;
    d.E = [theta](double u) { return std::pow(u, theta) * std::sin(std::log(u)); };
    d.density_log = [theta](double v) { return std::exp((theta - 1) * v) * (theta * std::sin(v) + std::cos(v)); };
    d.theta = theta;
    d.C_E = 1;
    d.name = "pow-sin-log";
    return d;
  }

  // max over the samples of |E(u)|/(C_E u^θ); E(1) must vanish.
  double bound_ratio(double log_max, int samples = 2000) const {
    if (std::fabs(E(1)) > 0) fail(ErrorKind::ConditionViolated, "E(1) ≠ 0");
    double r = 0;
    for (int i = 1; i <= samples; ++i) {
      double u = std::exp(log_max * i / samples);
      double lim = C_E * std::pow(u, theta);
      if (lim == 0) {
        if (E(u) != 0) return std::numeric_limits<double>::infinity();
        continue;
      }
      r = std::max(r, std::fabs(E(u)) / lim);
    }
    return r;
  }
};

struct BValue {
  double b = 0;
  double quad_error = 0;
  double tail_bound = 0;
  double V = 0;  // cut in log u
};

// b = ∫_1^∞ u^{−2} E(u) du = ∫_0^∞ e^{−v} E(e^v) dv.
inline BValue compute_b(const DeviationMeasure& d, double tol = 1e-11) {
  if (d.theta >= 1) fail(ErrorKind::TailDivergent, "θ ≥ 1");
  BValue r;
  double one_minus = 1 - d.theta;
  r.V = d.C_E > 0 ? std::max(1.0, std::log(d.C_E / (tol * one_minus)) / one_minus) : 1.0;
  r.tail_bound = d.C_E * std::exp(-one_minus * r.V) / one_minus;
  std::vector<double> cuts{0};
  for (double c : d.breakpoints_log)
    if (c > 0 && c < r.V) cuts.push_back(c);
  cuts.push_back(r.V);
  QuadOptions o;
  o.abs_tol = tol / 4;
  o.rel_tol = 1e-14;
  o.initial_panels = 4 + static_cast<int>(r.V);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto q = integrate_gk([&](double v) { return cplx(std::exp(-v) * d.E(std::exp(v))); }, cuts[i], cuts[i + 1], o);
    r.b += q.value.real();
    r.quad_error += q.error;
  }
  return r;
}

inline double n_max_estimate(double theta, double log_x) {
  if (!(log_x > std::numbers::e)) fail(ErrorKind::InvalidArgument, "log x ≤ e");
  if (theta >= 1) return 0;
  return std::sqrt(2 * (1 - theta)) * std::sqrt(log_x / std::log(log_x));
}

struct ConvolutionLedger {
  int n = 0;
  double x = 0, log_x = 0;
  double I_n = 0;      // S1 + S2 − S3
  double direct = 0;   // cumulative of the n-fold density profile
  double b_pow_n = 0;
  double y = 0;        // hyperbola split, x^{1/n}
  double S1 = 0, S2 = 0, S3 = 0;
  double error_estimate = 0;  // |I_n − direct|
};

// Densities of (dE/u)^{*n} in v on the grid w_i = i h, 0 ≤ i ≤ N, with cumulative profiles
// P_n(w) = ∫_0^w (dE/u)^{*n}. Built once; the hyperbola recursion reads these.
class ConvolutionProfiles {
 public:
  ConvolutionProfiles(const DeviationMeasure& d, double log_max, int n_max, double h = 1e-3) : h_(h) {
    if (!d.density_log) fail(ErrorKind::InvalidArgument, "profiles need a density");
    if (n_max < 1) fail(ErrorKind::InvalidArgument, "n_max < 1");
    N_ = static_cast<size_t>(std::ceil(log_max / h));
    e_.resize(N_ + 1);
    for (size_t i = 0; i <= N_; ++i) e_[i] = d.density_log(h * static_cast<double>(i));
    density_.push_back({});  // n = 0 is δ_0
    density_.push_back(e_);
    for (int n = 2; n <= n_max; ++n) density_.push_back(convolve(e_, density_.back()));
    cumulative_.push_back(std::vector<double>(N_ + 1, 1.0));
    for (int n = 1; n <= n_max; ++n) {
      const auto& f = density_[static_cast<size_t>(n)];
      std::vector<double> c(N_ + 1, 0.0);
      for (size_t i = 1; i <= N_; ++i) c[i] = c[i - 1] + 0.5 * h_ * (f[i - 1] + f[i]);
      cumulative_.push_back(std::move(c));
    }
    abs_mass_ = 0;
    for (size_t i = 1; i <= N_; ++i) abs_mass_ += 0.5 * h_ * (std::fabs(e_[i - 1]) + std::fabs(e_[i]));
  }

  int n_max() const { return static_cast<int>(density_.size()) - 1; }
  double log_max() const { return h_ * static_cast<double>(N_); }
  double h() const { return h_; }
  double abs_mass() const { return abs_mass_; }  // ∫_0^{log_max} |dE/u|

  // P_n(w), linear between nodes.
  double P(int n, double w) const { return interp(cumulative_.at(static_cast<size_t>(n)), w); }
  double density(int n, double w) const { return interp(density_.at(static_cast<size_t>(n)), w); }

  // I_n(x) by the hyperbola split y = x^{1/n}: S1 + S2 − S3 with
  // S1 = ∫_0^Y e(u) P_{n−1}(L−u) du, S2 = ∫_0^{L−Y} d_{n−1}(v) P_1(L−v) dv, S3 = P_1(Y) P_{n−1}(L−Y).
  ConvolutionLedger I(int n, double log_x, double b = 0) const {
    if (n > n_max()) fail(ErrorKind::DepthExceeded, "n above the built depth");
    if (log_x > log_max() + 1e-12) fail(ErrorKind::InvalidArgument, "x beyond the profile grid");
    ConvolutionLedger r;
    r.n = n;
    r.log_x = log_x;
    r.x = std::exp(log_x);
    r.b_pow_n = std::pow(b, n);
    if (n == 0) {
      r.I_n = r.direct = 1;
      return r;
    }
    r.direct = P(n, log_x);
    if (n == 1) {
      r.I_n = r.direct;
      r.S1 = r.direct;
      r.y = r.x;
      return r;
    }
    const double L = log_x, Y = L / n;
    r.y = std::exp(Y);
    r.S1 = simpson([&](double u) { return density(1, u) * P(n - 1, L - u); }, 0, Y);
    r.S2 = simpson([&](double v) { return density(n - 1, v) * P(1, L - v); }, 0, L - Y);
    r.S3 = P(1, Y) * P(n - 1, L - Y);
    r.I_n = r.S1 + r.S2 - r.S3;
    r.error_estimate = std::fabs(r.I_n - r.direct);
    return r;
  }

 private:
  double interp(const std::vector<double>& f, double w) const {
    if (w <= 0) return f[0];
    double q = w / h_;
    size_t i = static_cast<size_t>(q);
    if (i >= N_) return f[N_];
    double t = q - static_cast<double>(i);
    return f[i] + t * (f[i + 1] - f[i]);
  }

  template <class F>
  double simpson(F f, double a, double b) const {
    if (!(b > a)) return 0;
    long n = std::max(2L, 2 * static_cast<long>(std::ceil((b - a) / (2 * h_))));
    double s = (b - a) / static_cast<double>(n), acc = f(a) + f(b);
    for (long i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + s * static_cast<double>(i));
    return acc * s / 3;
  }

  // Trapezoid convolution on the grid.
  std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) const {
    std::vector<double> out(N_ + 1, 0.0);
    for (size_t i = 1; i <= N_; ++i) {
      double s = 0.5 * (a[0] * b[i] + a[i] * b[0]);
      for (size_t j = 1; j < i; ++j) s += a[j] * b[i - j];
      out[i] = h_ * s;
    }
    return out;
  }

  double h_;
  size_t N_ = 0;
  std::vector<double> e_;
  std::vector<std::vector<double>> density_, cumulative_;
  double abs_mass_ = 0;
};

struct Reconstruction {
  double x = 0, log_x = 0;
  double N = 0;            // x Σ I_n/n!
  double ebx = 0;          // e^b x
  double rel_gap = 0;      // (N − e^b x)/x
  int terms = 0;
  double tail_bound = 0;   // x Σ_{n > terms} A^n/n! with A = ∫|dE/u|
  std::vector<double> partial_sums;  // Σ_{n ≤ k} I_n/n!
};

// Terms run until the remaining tail, bounded by A^n/n! with A = ∫|dE/u|, is below 1e−12.
inline Reconstruction reconstruct_N(const ConvolutionProfiles& P, double log_x, double b) {
  Reconstruction r;
  r.log_x = log_x;
  r.x = std::exp(log_x);
  double A = P.abs_mass();
  double term_bound = 1, sum = 0;
  int n = 0;
  for (;; ++n) {
    if (n > P.n_max()) fail(ErrorKind::DepthExceeded, "reconstruction needs deeper profiles");
    sum += (n == 0 ? 1.0 : P.P(n, log_x)) / std::tgamma(n + 1.0);
    r.partial_sums.push_back(sum);
    term_bound *= (n == 0 ? 1.0 : A / n);
    if (term_bound * A / (n + 1) < 1e-12) break;
  }
  r.terms = n + 1;
  // Σ_{k > n} A^k/k! ≤ (A^{n+1}/(n+1)!) · 1/(1 − A/(n+2)).
  double next = term_bound * A / (n + 1);
  r.tail_bound = r.x * next / std::max(1e-300, 1 - A / (n + 2));
  r.N = r.x * sum;
  r.ebx = std::exp(b) * r.x;
  r.rel_gap = (r.N - r.ebx) / r.x;
  return r;
}

struct SlopeFit {
  double slope = 0, intercept = 0;
  std::vector<double> log_x, log_gap;
};

// Least-squares slope of log sup_{w ∈ [L, L+window]} |I_1(e^w) − b| against L.
inline SlopeFit i1_slope(const DeviationMeasure& d, double b, double L_lo, double L_hi, int points = 10,
                         double window = 2 * std::numbers::pi) {
  SlopeFit f;
  QuadOptions o;
  o.abs_tol = 1e-14;
  o.rel_tol = 1e-13;
  for (int i = 0; i < points; ++i) {
    double L = L_lo + (L_hi - L_lo) * i / std::max(1, points - 1);
    // I_1(e^w) − b = −∫_w^∞ dE/u; integrated outwards from the top of the window.
    double W = L + window, cut = W + 60 / std::max(1e-3, 1 - d.theta);
    o.initial_panels = 8 + static_cast<int>(cut - W);
    double tail = integrate_gk([&](double v) { return cplx(d.density_log(v)); }, W, cut, o).value.real();
    double sup = 0, acc = tail;
    const int m = 256;
    double prev = W;
    for (int k = m; k >= 0; --k) {
      double w = L + window * k / m;
      if (k < m) acc += integrate_gk([&](double v) { return cplx(d.density_log(v)); }, w, prev, o).value.real();
      prev = w;
      sup = std::max(sup, std::fabs(acc));
    }
    f.log_x.push_back(L);
    f.log_gap.push_back(std::log(sup));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < f.log_x.size(); ++i) mx += f.log_x[i], my += f.log_gap[i];
  mx /= f.log_x.size();
  my /= f.log_x.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < f.log_x.size(); ++i) {
    sxx += (f.log_x[i] - mx) * (f.log_x[i] - mx);
    sxy += (f.log_x[i] - mx) * (f.log_gap[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

// CSV rows n, x, I_n, b_pow_n, oracle for n ≤ n_report at each log x; oracle is left empty.
inline void write_convolution_csv(std::ostream& os, const ConvolutionProfiles& P, const std::vector<double>& log_xs,
                                  double b, int n_report) {
  // oracle: the n-fold profile read directly at x, without the hyperbola split.
  os << "n,x,I_n,b_pow_n,oracle\n";
  os.precision(12);
  for (double L : log_xs)
    for (int n = 0; n <= n_report; ++n) {
      auto r = P.I(n, L, b);
      os << n << ',' << r.x << ',' << r.I_n << ',' << r.b_pow_n << ',' << r.direct << '\n';
    }
}

}  // namespace beurling
