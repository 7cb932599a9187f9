#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/hp_complex.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/quadrature.hpp"
#include "beurling/numeric/roots.hpp"
#include "beurling/numeric/split_exp.hpp"
#include "beurling/system/system.hpp"
#include "beurling/zeta/zeta.hpp"

namespace beurling {

// Everything here lives in the frame s = iτ_k + w. The exponent splits as
// f(s) = i τ log x + h(w), h(w) = (w+1) log x + ½ e^{log τ + i p_B − (1+δ) log τ · w}/w,
// where p_B = −(1+δ)τ log τ mod 2π and τ log x mod 2π is kept separately at full precision.

struct SaddleOptions {
  double c_m = 0.01;       // m_max = floor(c_m (log x)^{1/3} (log log x)^{2/3})
  double eta = 0.1;        // near-saddle switch, |θ| ≤ η/2
  int theta_steps = 400;
  unsigned bits = 0;       // 0: max(256, system bits)
  bool auto_shrink_cm = true;
  double sigma_lo = 0.5;   // left edge of V_m; lower it to study saddles that sit left of 1/2
};

struct SaddlePoint {
  int m = 0;
  HpComplex w;              // s_m − iτ at full precision
  cplx w_d;                 // same, double
  double sigma = 0;         // Re s_m
  double t_offset = 0;      // Im s_m − τ
  cplx h_val;               // h(w_m); Re f(s_m) = Re h
  double im_f_mod2pi = 0;   // Im f(s_m) reduced to (−π, π]
  cplx f_second;
  double newton_residual = 0;  // |f′(s_m)| / |f″(s_m)|
  int winding = 0;
  bool winding_ok = false;
  long long n_minus_M = 0;  // n_m − M, expected to equal m
  double t_lo = 0, t_hi = 0;  // V_m edges t_m^± − τ
  bool used_fallback = false;
  int newton_iterations = 0;
};

struct PathSample {
  double theta = 0, sigma = 0, t_offset = 0;
  cplx h;           // h(w) at the sample
  double tangent_arg = 0;  // arg(e^{−iπ/2} γ′), γ′ oriented towards increasing t
};

struct DescentPath {
  int m = 0;
  std::vector<PathSample> samples;  // sorted by θ, the saddle included
  size_t saddle_index = 0;
  double v_m = 0;
  double sigma_minus = 0, sigma_plus = 0;  // endpoints at θ = ∓π/2
  double max_im_drift = 0;
  bool re_decreasing = true;
  double max_tangent_dev = 0;  // max |tangent_arg|
  int bisection_fallbacks = 0;
};

struct PhaseReport {
  int m = 0;
  double distance = 0;           // d(Im f(s_m), target lattice)
  double main_term_distance = 0; // same for the asymptotic main term
  double error_term = 0;         // |Im f(s_m) − main term| reduced mod 2π
  bool pass = false;             // distance < π/8
};

struct SaddleContribution {
  int m = 0;
  SplitComplex value;            // ∫_{Γ_m} e^f exp(Σ′)/((s−1)(s+1)) ds
  double R = 0;                  // |value| relative to e^{Re f(s_m)} (i.e. |∫ e^{f−f(s_m)} …|)
  double log_R = 0;              // log |value|
  double phi = 0;                // value = (−1)^{k+1} R e^{i(π/2+φ)}
  bool sign_ok = false;          // Im value has sign (−1)^{k+1}
  double laplace_ratio = 0;      // |value| / Laplace approximation
  double width_integral = 0;     // ∫ e^{Re(f − f(s_m))} |ds|
  double width_constant = 0;     // width_integral · √(log x log τ)
  double lower_bound_ratio = 0;  // R / [cos(2π/5) e^{Re f}/τ² · width_integral]
  double sigma_prime_sup = 0;    // sup |Σ′| along Γ_m
  bool sigma_prime_ok = false;   // sup |Σ′| < π/16
  double quad_error = 0;
};

struct ContributionSet {
  std::vector<SaddleContribution> parts;
  SplitComplex total;
  int sign = 0;          // (−1)^{k+1}
  bool all_signs_ok = true;
  double R0 = 0;         // |m = 0 piece| / e^{Re f(s_0)}
  double lower_bound = 0;  // cos(2π/5) e^{Re f(s_0)}/τ² ∫ e^{Re(f − f(s_0))} |ds|, as a log
};

struct QuadraticModelReport {
  std::vector<double> r, eps;
  double slope = 0;  // least-squares slope of ε against r log τ
  double max_eps_inside = 0;  // max ε for r < η / log τ
};

class SaddleProblem {
 public:
  SaddleProblem(const ContinuousPrimeSystem& sys, int k, SaddleOptions opt = {})
      : sys_(sys), k_(k), opt_(opt), zp_(sys, ZetaMode::Primed, k) {
    if (k < 0 || k >= sys.K) fail(ErrorKind::InvalidArgument, "k out of range");
    const SystemTerm& t = sys.term(k);
    bits_ = opt_.bits ? opt_.bits : std::max<unsigned>(256, bits_of(t.tau));
    PrecisionGuard g(bits_);
    lx_hp_ = t.log_x;
    L_hp_ = t.log_tau;
    BL_hp_ = (1 + t.delta) * t.log_tau;
    pB_hp_ = reduce_mod_2pi_hp(-BL_hp_ * t.tau);
    if (pB_hp_ > hp_pi()) pB_hp_ -= hp_two_pi();
    pc_hp_ = reduce_mod_2pi_hp(t.tau * t.log_x);
    lx_ = to_double(lx_hp_);
    L_ = to_double(L_hp_);
    BL_ = to_double(BL_hp_);
    pB_ = to_double(pB_hp_);
    tau_d_ = t.tau_d;
    a_ = t.a_d;
    frame_ = zp_.frame(t.tau);
    certify_eta();
    update_mmax();
    if (opt_.auto_shrink_cm) auto_shrink();
  }

  int k() const { return k_; }
  int parity() const { return k_ % 2; }
  double log_x() const { return lx_; }
  double log_tau() const { return L_; }
  double BL() const { return BL_; }
  double tau() const { return tau_d_; }
  double c_m() const { return opt_.c_m; }
  int m_max() const { return m_max_; }
  unsigned bits() const { return bits_; }
  const SaddleOptions& options() const { return opt_; }
  const ZetaEvaluator& primed() const { return zp_; }
  const ZetaFrame& frame() const { return frame_; }
  const ContinuousPrimeSystem& system() const { return sys_; }

  // Largest |m| with |m| < (log τ)^{3/4}.
  int m_study_limit() const { return static_cast<int>(std::ceil(std::pow(L_, 0.75))) - 1; }

  // ½ e^{log τ + i p_B − BL w} / w
  cplx q(cplx w) const {
    if (w == cplx(0, 0)) fail(ErrorKind::PoleAtITau, "f at s = iτ");
    return 0.5 * std::exp(cplx(L_ - BL_ * w.real(), pB_ - BL_ * w.imag())) / w; }
  cplx h(cplx w) const { return (w + 1.0) * lx_ + q(w); }
  cplx h1(cplx w) const { return lx_ - q(w) * (BL_ + 1.0 / w); }
  cplx h2(cplx w) const {
    cplx u = BL_ + 1.0 / w;
    return q(w) * (u * u + 1.0 / (w * w));
  }
  cplx h3(cplx w) const {
    // d/dw of q·(u² + 1/w²), with q′ = −q u and u′ = −1/w².
    cplx u = BL_ + 1.0 / w, iw = 1.0 / w;
    cplx P = u * u + iw * iw;
    cplx dP = 2.0 * u * (-iw * iw) - 2.0 * iw * iw * iw;
    return q(w) * (-u * P + dP);
  }

  // Full-precision versions.
  HpComplex q_hp(const HpComplex& w) const {
    if (w.re == 0 && w.im == 0) fail(ErrorKind::PoleAtITau, "f at s = iτ");
    HpComplex e = exp(HpComplex(L_hp_ - BL_hp_ * w.re, pB_hp_ - BL_hp_ * w.im));
    return HpComplex(Real("0.5")) * e / w;
  }
  HpComplex h_hp(const HpComplex& w) const {
    return (w + HpComplex(Real(1))) * HpComplex(lx_hp_) + q_hp(w);
  }
  HpComplex h1_hp(const HpComplex& w) const {
    return HpComplex(lx_hp_) - q_hp(w) * (HpComplex(BL_hp_) + reciprocal(w));
  }
  HpComplex h2_hp(const HpComplex& w) const {
    HpComplex iw = reciprocal(w), u = HpComplex(BL_hp_) + iw;
    return q_hp(w) * (u * u + iw * iw);
  }

  // Edges of V_m in the frame: Im w ∈ [t_m^− − τ, t_m^+ − τ], Re w ∈ [1/2, 1].
  double t_minus(int m) const { return (2 * std::numbers::pi * m - std::numbers::pi / 2) / BL_; }
  double t_plus(int m) const { return (2 * std::numbers::pi * m + std::numbers::pi / 2) / BL_; }

  // Asymptotic seed for s_m.
  cplx seed(int m) const {
    double llx = std::log(lx_);
    double sg = 1 - std::sqrt(2.0) * std::sqrt(llx / lx_) - std::sqrt(2.0) * (a_ + std::log(2.0)) / std::sqrt(lx_ * llx);
    double tt = 2 * std::numbers::pi * m / BL_ * (1 - (1 + std::sqrt(2.0) * std::sqrt(llx / lx_)) / BL_);
    return {std::clamp(sg, opt_.sigma_lo + 0.02, 0.98), tt};
  }

  double sigma0_approx() const {
    double llx = std::log(lx_);
    return 1 - std::sqrt(2.0) * std::sqrt(llx / lx_) - std::sqrt(2.0) * (a_ + std::log(2.0)) / std::sqrt(lx_ * llx);
  }
  double sigma_pm_approx() const {
    double llx = std::log(lx_);
    return 1 - std::sqrt(2.0) * std::sqrt(llx / lx_) -
           std::sqrt(2.0) * (a_ + std::log(2.0) + std::log(std::numbers::pi / 2)) / std::sqrt(lx_ * llx);
  }

  // Winding number of h′ around the rectangle [s0,s1]×[t0,t1] (counter-clockwise).
  int winding(double s0, double s1, double t0, double t1) const {
    cplx c[5] = {{s1, t0}, {s1, t1}, {s0, t1}, {s0, t0}, {s1, t0}};
    double total = 0;
    for (int e = 0; e < 4; ++e) total += arg_change(c[e], c[e + 1], 0);
    return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
  }
  int winding_Vm(int m) const { return winding(opt_.sigma_lo, 1.0, t_minus(m), t_plus(m)); }

  SaddlePoint find_saddle(int m) const {
    SaddlePoint sp;
    sp.m = m;
    sp.t_lo = t_minus(m);
    sp.t_hi = t_plus(m);
    cplx w = seed(m);
    bool ok = newton_double(w, sp.newton_iterations);
    if (!ok || !inside(w, m)) {
      w = quadtree_search(m);
      sp.used_fallback = true;
      int it = 0;
      if (!newton_double(w, it) || !inside(w, m)) fail(ErrorKind::NewtonFailed, "saddle m=" + std::to_string(m));
    }
    PrecisionGuard g(bits_);
    HpComplex W(Real(w.real()), Real(w.imag()));
    Real tol = hpm::ldexp(Real(1), -static_cast<int>(bits_) + 40);
    for (int it = 0; it < 40; ++it) {
      HpComplex d1 = h1_hp(W), d2 = h2_hp(W);
      HpComplex step = d1 / d2;
      W -= step;
      ++sp.newton_iterations;
      if (abs(step) < tol * (1 + abs(W))) break;
    }
    HpComplex d1 = h1_hp(W), d2 = h2_hp(W);
    sp.newton_residual = to_double(abs(d1) / abs(d2));
    sp.w = W;
    sp.w_d = W.to_cplx();
    sp.sigma = sp.w_d.real();
    sp.t_offset = sp.w_d.imag();
    HpComplex hv = h_hp(W);
    sp.h_val = hv.to_cplx();
    sp.im_f_mod2pi = to_double(reduce_mod_2pi_hp(pc_hp_ + hv.im));
    sp.f_second = d2.to_cplx();
    sp.winding = winding_Vm(m);
    sp.winding_ok = sp.winding == 1;
    // n_m − M from the argument equation BL·(t_m − τ) − p_B = β − α + 2π(n_m − M), p_B in (−π, π].
    HpComplex iw = reciprocal(W);
    Real beta = arg(HpComplex(BL_hp_) + iw), alpha = arg(W);
    Real num = BL_hp_ * W.im - pB_hp_ - beta + alpha;
    sp.n_minus_M = hpm::round(num / hp_two_pi()).convert_to<long long>();
    return sp;
  }

  // Solution σ of Im h(σ + i t) = target: the rightmost root in (σ_floor, σ_ceil].
  std::optional<double> solve_sigma_bisect(double t, double target, double s_floor = 0.05, double s_ceil = 1.5) const {
    auto G = [&](double s) { return h({s, t}).imag() - target; };
    double hi = s_ceil, ghi = G(hi);
    const int n = 290;
    for (int i = 1; i <= n; ++i) {
      double lo = s_ceil - (s_ceil - s_floor) * i / n, glo = G(lo);
      if ((glo <= 0) != (ghi <= 0)) {
        auto r = find_root_bracketed_ex([&](double s) { return G(s); }, lo, hi, 1e-15);
        return r.x;
      }
      hi = lo;
      ghi = glo;
    }
    return std::nullopt;
  }

  // Newton in σ at fixed t from a seed.
  std::optional<double> solve_sigma_newton(double t, double target, double seed_sigma) const {
    double s = seed_sigma;
    for (int it = 0; it < 60; ++it) {
      cplx w(s, t);
      double G = h(w).imag() - target;
      double dG = h1(w).imag();
      if (dG == 0 || !std::isfinite(dG)) return std::nullopt;
      double step = G / dG;
      s -= step;
      if (std::fabs(step) < 1e-15 * (1 + std::fabs(s))) return s;
    }
    return std::nullopt;
  }

  double sigma_on_path(double theta, int m, const SaddlePoint& sp, double seed_sigma) const {
    double t = (theta + 2 * std::numbers::pi * m) / BL_;
    double target = sp.h_val.imag();
    double th_m = BL_ * sp.t_offset - 2 * std::numbers::pi * m;
    if (std::fabs(theta - th_m) <= opt_.eta / 2) {
      // Quadratic-model seed: s − s_m ∝ e^{iφ}, e^{2iφ} = −|f″|/f″, upper branch above the saddle.
      double phi = (std::numbers::pi - std::arg(sp.f_second)) / 2;
      double dt = t - sp.t_offset;
      double cot = std::cos(phi) / std::sin(phi);
      double s_seed = std::isfinite(seed_sigma) ? seed_sigma : sp.sigma + dt * cot;
      if (dt == 0) return sp.sigma;
      auto r = solve_sigma_newton(t, target, s_seed);
      if (r && std::fabs(*r - (sp.sigma + dt * cot)) < 0.25) return *r;
    }
    auto r = solve_sigma_bisect(t, target);
    if (!r) fail(ErrorKind::PathLost, "no σ bracket at θ = " + std::to_string(theta) + ", m = " + std::to_string(m));
    return *r;
  }

  // dσ/dt along Im h = const.
  double dsigma_dt(cplx w) const {
    cplx d = h1(w);
    return -d.real() / d.imag();
  }

  DescentPath trace_descent(int m, const SaddlePoint& sp) const {
    DescentPath p;
    p.m = m;
    double th_m = BL_ * sp.t_offset - 2 * std::numbers::pi * m;
    std::vector<double> thetas;
    int N = opt_.theta_steps;
    for (int i = 0; i <= N; ++i) thetas.push_back(-std::numbers::pi / 2 + std::numbers::pi * i / N);
    thetas.push_back(th_m);
    std::sort(thetas.begin(), thetas.end());
    thetas.erase(std::unique(thetas.begin(), thetas.end(), [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
                 thetas.end());
    size_t im = std::lower_bound(thetas.begin(), thetas.end(), th_m - 1e-14) - thetas.begin();
    std::vector<double> sig(thetas.size(), NAN);
    sig[im] = sp.sigma;
    // March outward from the saddle so Newton seeds come from the previous sample.
    for (int dir : {+1, -1}) {
      double prev = sp.sigma, prev2 = NAN;
      double prev_th = th_m, prev2_th = NAN;
      for (long i = static_cast<long>(im) + dir; i >= 0 && i < static_cast<long>(thetas.size()); i += dir) {
        double th = thetas[i];
        double seed = std::isnan(prev2) ? NAN : prev + (prev - prev2) * (th - prev_th) / (prev_th - prev2_th);
        sig[i] = sigma_on_path(th, m, sp, seed);
        prev2 = prev;
        prev2_th = prev_th;
        prev = sig[i];
        prev_th = th;
      }
    }
    double target = sp.h_val.imag();
    double phi0 = (std::numbers::pi - std::arg(sp.f_second)) / 2;
    for (size_t i = 0; i < thetas.size(); ++i) {
      PathSample s;
      s.theta = thetas[i];
      s.sigma = sig[i];
      s.t_offset = (thetas[i] + 2 * std::numbers::pi * m) / BL_;
      cplx w(s.sigma, s.t_offset);
      s.h = h(w);
      p.max_im_drift = std::max(p.max_im_drift, std::fabs(s.h.imag() - target));
      // Tangent towards increasing t: −conj(h′) above the saddle, +conj(h′) below.
      cplx dir;
      if (i == im)
        dir = std::polar(1.0, phi0);
      else
        dir = (i > im ? -1.0 : 1.0) * std::conj(h1(w));
      if (dir.imag() < 0) dir = -dir;
      s.tangent_arg = std::arg(dir * cplx(0, -1));
      p.max_tangent_dev = std::max(p.max_tangent_dev, std::fabs(s.tangent_arg));
      p.samples.push_back(s);
    }
    p.saddle_index = im;
    for (size_t i = im + 1; i < p.samples.size(); ++i)
      if (!(p.samples[i].h.real() < p.samples[i - 1].h.real())) p.re_decreasing = false;
    for (size_t i = im; i-- > 0;)
      if (!(p.samples[i].h.real() < p.samples[i + 1].h.real())) p.re_decreasing = false;
    p.sigma_minus = p.samples.front().sigma;
    p.sigma_plus = p.samples.back().sigma;
    cplx d = BL_ + 1.0 / sp.w_d;
    p.v_m = (lx_ / d).imag();
    return p;
  }

  DescentPath trace_descent(int m) const { return trace_descent(m, find_saddle(m)); }

  PhaseReport phase_report(int m, const SaddlePoint& sp) const {
    PhaseReport r;
    r.m = m;
    double target = parity() == 0 ? 0.0 : std::numbers::pi;
    r.distance = std::fabs(wrap_pi(sp.im_f_mod2pi - target));
    PrecisionGuard g(bits_);
    Real llx = hpm::log(lx_hp_);
    Real main_extra = lx_hp_ * 2 * hp_pi() * m / BL_hp_ * (1 - (1 + hpm::sqrt(2 * llx / lx_hp_)) / BL_hp_);
    double main = to_double(reduce_mod_2pi_hp(pc_hp_ + main_extra));
    r.main_term_distance = std::fabs(wrap_pi(main - target));
    r.error_term = std::fabs(wrap_pi(sp.im_f_mod2pi - main));
    r.pass = r.distance < std::numbers::pi / 8;
    return r;
  }
  PhaseReport phase_report(int m) const { return phase_report(m, find_saddle(m)); }

  // g(w) = exp(Σ′)/((s−1)(s+1)) at s = iτ + w.
  cplx g(cplx w) const {
    cplx s(w.real(), tau_d_ + w.imag());
    return std::exp(zp_.chunk_sum(frame_, w)) / ((s - 1.0) * (s + 1.0));
  }

  SaddleContribution contribution(int m, const SaddlePoint& sp, const DescentPath& path, double rel_tol = 1e-9) const {
    SaddleContribution c;
    c.m = m;
    double target = sp.h_val.imag();
    double th_m = BL_ * sp.t_offset - 2 * std::numbers::pi * m;
    // σ(θ) by Newton seeded from the traced samples (linear interpolation).
    auto sigma_at = [&](double th) {
      auto it = std::lower_bound(path.samples.begin(), path.samples.end(), th,
                                 [](const PathSample& a, double v) { return a.theta < v; });
      double seed;
      if (it == path.samples.begin()) seed = it->sigma;
      else if (it == path.samples.end()) seed = path.samples.back().sigma;
      else {
        auto pr = it - 1;
        double u = (th - pr->theta) / (it->theta - pr->theta);
        seed = pr->sigma * (1 - u) + it->sigma * u;
      }
      double t = (th + 2 * std::numbers::pi * m) / BL_;
      auto r = solve_sigma_newton(t, target, seed);
      if (!r || std::fabs(*r - seed) > 0.05) r = solve_sigma_bisect(t, target);
      if (!r) fail(ErrorKind::PathLost, "σ(θ) lost during integration");
      return *r;
    };
    double sup_sigma_prime = 0;
    auto integrand = [&](double th, int which) -> cplx {
      double t = (th + 2 * std::numbers::pi * m) / BL_;
      double sg = sigma_at(th);
      cplx w(sg, t);
      double dsdt = dsigma_dt(w);
      cplx ds_dth = cplx(dsdt, 1.0) / BL_;
      cplx e = std::exp(h(w) - sp.h_val);
      if (which == 1) return std::abs(e) * std::abs(ds_dth);
      cplx sp_sum = zp_.chunk_sum(frame_, w);
      sup_sigma_prime = std::max(sup_sigma_prime, std::abs(sp_sum));
      cplx s(w.real(), tau_d_ + w.imag());
      return e * std::exp(sp_sum) / ((s - 1.0) * (s + 1.0)) * ds_dth;
    };
    QuadOptions qo;
    qo.rel_tol = rel_tol;
    qo.abs_tol = 0;
    qo.initial_panels = 8;
    cplx I = 0, W = 0;
    double err = 0;
    for (auto [a, b] : {std::pair{-std::numbers::pi / 2, th_m}, std::pair{th_m, std::numbers::pi / 2}}) {
      if (!(b > a)) continue;
      auto r = integrate_gk([&](double th) { return integrand(th, 0); }, a, b, qo);
      I += r.value;
      err += r.error;
      auto rw = integrate_gk([&](double th) { return integrand(th, 1); }, a, b, qo);
      W += rw.value;
    }
    c.quad_error = err;
    c.sigma_prime_sup = sup_sigma_prime;
    c.sigma_prime_ok = sup_sigma_prime < std::numbers::pi / 16;
    c.width_integral = W.real();
    c.width_constant = c.width_integral * std::sqrt(lx_ * L_);
    // value = e^{f(s_m)} I, with Im f(s_m) taken mod 2π.
    SplitComplex ef = SplitComplex::from_log(cplx(sp.h_val.real(), sp.im_f_mod2pi));
    c.value = ef * SplitComplex::from_log(std::log(I));
    c.R = std::abs(I);
    c.log_R = c.value.log_abs();
    double sgn = parity() == 0 ? -1.0 : 1.0;  // (−1)^{k+1}
    cplx unit = std::polar(1.0, c.value.phase()) * sgn;
    c.phi = wrap_pi(std::arg(unit) - std::numbers::pi / 2);
    c.sign_ok = std::sin(c.value.phase()) * sgn > 0;
    double laplace_log = sp.h_val.real() + 0.5 * std::log(2 * std::numbers::pi / std::abs(sp.f_second)) +
                         std::log(std::abs(g(sp.w_d)));
    c.laplace_ratio = std::exp(c.log_R - laplace_log);
    double lb_log = std::log(std::cos(2 * std::numbers::pi / 5)) + sp.h_val.real() - 2 * L_ + std::log(c.width_integral);
    c.lower_bound_ratio = std::exp(c.log_R - lb_log);
    return c;
  }

  // All Γ_m with |m| ≤ m_hi. Throws PhaseViolation if some |φ_m| ≥ 2π/5.
  ContributionSet contributions(int m_hi) const {
    ContributionSet cs;
    cs.sign = parity() == 0 ? -1 : 1;
    std::string bad;
    for (int m = -m_hi; m <= m_hi; ++m) {
      SaddlePoint sp = find_saddle(m);
      DescentPath p = trace_descent(m, sp);
      SaddleContribution c = contribution(m, sp, p);
      cs.total = cs.total + c.value;
      cs.all_signs_ok = cs.all_signs_ok && c.sign_ok;
      if (std::fabs(c.phi) >= 2 * std::numbers::pi / 5) bad += " m=" + std::to_string(m);
      if (m == 0) {
        cs.R0 = c.R;
        cs.lower_bound = std::log(std::cos(2 * std::numbers::pi / 5)) + sp.h_val.real() - 2 * L_ + std::log(c.width_integral);
      }
      cs.parts.push_back(c);
    }
    if (!bad.empty()) fail(ErrorKind::PhaseViolation, "|φ_m| ≥ 2π/5 at" + bad);
    return cs;
  }

  QuadraticModelReport quadratic_model(const SaddlePoint& sp, int n = 24) const {
    QuadraticModelReport rep;
    double rmax = opt_.eta / L_;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      double r = rmax * std::pow(10.0, -3.0 * (n - 1 - i) / (n - 1));
      double worst = 0;
      for (int j = 0; j < 8; ++j) {
        cplx d = std::polar(r, 2 * std::numbers::pi * j / 8);
        cplx w = sp.w_d + d;
        // Cubic-accurate difference via Taylor remainder: f − f_m − ½f″d².
        cplx diff = h(w) - sp.h_val - 0.5 * sp.f_second * d * d;
        double eps = std::abs(diff) / (0.5 * std::abs(sp.f_second) * r * r);
        worst = std::max(worst, eps);
      }
      rep.r.push_back(r);
      rep.eps.push_back(worst);
      rep.max_eps_inside = std::max(rep.max_eps_inside, worst);
      double x = r * L_, y = worst;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
  }

  void write_path_csv(std::ostream& os, const DescentPath& p, bool header = true) const {
    if (header) os << "m,theta,sigma,t,re_f,im_f\n";
    os.precision(17);
    for (auto& s : p.samples) {
      double im_f = wrap_pi(to_double(pc_hp_) + s.h.imag());
      os << p.m << ',' << s.theta << ',' << s.sigma << ',' << tau_d_ + s.t_offset << ',' << s.h.real() << ',' << im_f
         << '\n';
    }
  }

 private:
  ContinuousPrimeSystem sys_;
  int k_;
  SaddleOptions opt_;
  ZetaEvaluator zp_;
  ZetaFrame frame_;
  unsigned bits_ = 256;
  Real lx_hp_, L_hp_, BL_hp_, pB_hp_, pc_hp_;
  double lx_ = 0, L_ = 0, BL_ = 0, pB_ = 0, tau_d_ = 0, a_ = 0;
  int m_max_ = 0;

  // Halve η until the quadratic model holds with ε < 0.05 on r < η/log τ.
  void certify_eta() {
    try {
      SaddlePoint s0 = find_saddle(0);
      for (int i = 0; i < 12 && quadratic_model(s0).max_eps_inside >= 0.05; ++i) opt_.eta /= 2;
    } catch (const Error&) {
    }
  }

  void update_mmax() {
    double llx = std::log(lx_);
    m_max_ = static_cast<int>(std::floor(opt_.c_m * std::cbrt(lx_) * std::pow(llx, 2.0 / 3)));
  }

  // Halve c_m while the phase error term at |m| = m_max exceeds π/16.
  void auto_shrink() {
    while (m_max_ > 0) {
      bool bad = false;
      for (int m : {-m_max_, m_max_}) {
        try {
          auto sp = find_saddle(m);
          if (phase_report(m, sp).error_term > std::numbers::pi / 16) bad = true;
        } catch (const Error&) {
          bad = true;
        }
      }
      if (!bad) return;
      opt_.c_m /= 2;
      update_mmax();
    }
  }

  bool inside(cplx w, int m) const {
    return w.real() > opt_.sigma_lo && w.real() < 1.0 && w.imag() > t_minus(m) && w.imag() < t_plus(m);
  }

  bool newton_double(cplx& w, int& iters) const {
    for (int it = 0; it < 60; ++it) {
      cplx d2 = h2(w);
      if (std::abs(d2) == 0) return false;
      cplx step = h1(w) / d2;
      w -= step;
      ++iters;
      if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return false;
      if (std::abs(step) < 1e-14 * (1 + std::abs(w))) return true;
    }
    return false;
  }

  double arg_change(cplx a, cplx b, int depth) const {
    cplx fa = h1(a), fb = h1(b);
    double d = std::arg(fb / fa);
    if (std::fabs(d) > 0.3 && depth < 30) {
      cplx mid = 0.5 * (a + b);
      return arg_change(a, mid, depth + 1) + arg_change(mid, b, depth + 1);
    }
    return d;
  }

  // Winding-guided subdivision of V_m down to a small box, then its centre.
  cplx quadtree_search(int m) const {
    double s0 = opt_.sigma_lo, s1 = 1.0, t0 = t_minus(m), t1 = t_plus(m);
    if (winding(s0, s1, t0, t1) != 1) fail(ErrorKind::WindingNot1, "∂V_m winding ≠ 1 for m=" + std::to_string(m));
    for (int depth = 0; depth < 40; ++depth) {
      double sm = 0.5 * (s0 + s1), tm = 0.5 * (t0 + t1);
      double boxes[4][4] = {{s0, sm, t0, tm}, {sm, s1, t0, tm}, {s0, sm, tm, t1}, {sm, s1, tm, t1}};
      bool found = false;
      for (auto& b : boxes) {
        if (winding(b[0], b[1], b[2], b[3]) == 1) {
          s0 = b[0], s1 = b[1], t0 = b[2], t1 = b[3];
          found = true;
          break;
        }
      }
      if (!found) break;  // zero on a sub-box edge; the current box centre is close enough for Newton
      if (s1 - s0 < 1e-9) break;
    }
    return {0.5 * (s0 + s1), 0.5 * (t0 + t1)};
  }
};

}  // namespace beurling
