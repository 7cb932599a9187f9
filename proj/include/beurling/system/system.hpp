#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "beurling/measure/measure.hpp"
#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/roots.hpp"

namespace beurling {

namespace hpm = boost::multiprecision;

// One chunk of Π_C: R_k(x) = sin(τ log x) on (τ^{1+δ}, τ^ν], with x_k tied to τ_k by
// log τ = √(log x · log log x / 2).
struct SystemTerm {
  int k = 0;
  Real tau, log_tau, a, delta, nu, log_x;
  bool toy = false;  // parameters set by hand; properties (b)–(d) not expected

  // Cached doubles for fast evaluation.
  double tau_d = 0, log_tau_d = 0, a_d = 0, delta_d = 0, nu_d = 0, log_x_d = 0;

  int parity() const { return k % 2; }
  // (1+δ) log τ = log τ + log log τ + a.
  Real B_log_tau() const { return (1 + delta) * log_tau; }
  Real nu_log_tau() const { return nu * log_tau; }
  double B_log_tau_d() const { return (1 + delta_d) * log_tau_d; }
  double nu_log_tau_d() const { return nu_d * log_tau_d; }

  void refresh_doubles() {
    tau_d = to_double(tau);
    log_tau_d = to_double(log_tau);
    a_d = to_double(a);
    delta_d = to_double(delta);
    nu_d = to_double(nu);
    log_x_d = to_double(log_x);
  }
};

struct ContinuousPrimeSystem {
  int K = 0;
  std::vector<SystemTerm> terms;
  Real alpha;
  PrecisionContext ctx;

  const SystemTerm& term(int k) const { return terms.at(static_cast<size_t>(k)); }
};

struct TermReport {
  int k = 0;
  double residual_b_delta = 0;  // distance of (1+δ)τ log τ to 2πZ
  double residual_b_nu = 0;     // distance of ντ log τ to 2πZ
  double residual_c = 0;        // distance of τ log x to the parity lattice
  double d_distance = 0;
  double d_threshold = 0;
  bool a_ok = true;             // τ_{k+1} > (2τ_k)^5 (vacuous for the last k)
  bool xk_ok = true;
  bool delta_ok = true;
  bool a_range_ok = true;       // a ∈ [log 6, log 6 + 1] and a ≥ log(2ν)
  bool nu_range_ok = true;
  double xi_lo = 0, xi_hi = 0;  // log ξ search interval
  double epsilon = 0, eta = 0;
  unsigned bits = 0;
  int skipped_crossings = 0;
  double residual_limit_log2 = 0;  // log2 of the (b),(c) pass threshold

  bool b_ok() const { return std::log2(std::max(residual_b_delta, 1e-300)) < residual_limit_log2 &&
                             std::log2(std::max(residual_b_nu, 1e-300)) < residual_limit_log2; }
  bool c_ok() const { return std::log2(std::max(residual_c, 1e-300)) < residual_limit_log2; }
  bool d_ok() const { return d_distance < d_threshold; }
  bool all_ok() const { return a_ok && b_ok() && c_ok() && d_ok() && xk_ok && delta_ok && a_range_ok && nu_range_ok; }
};

struct BuildReport {
  std::vector<TermReport> terms;
  bool all_ok() const {
    for (auto& t : terms)
      if (!t.all_ok()) return false;
    return true;
  }
};

struct BuildOptions {
  int K = 1;
  double tau_floor = 3;
  bool relaxed = true;
  bool auto_bits = true;
  PrecisionContext ctx;
};

namespace sysdetail {

// log τ as a function of y = log x.
inline Real log_tau_of(const Real& y) { return hpm::sqrt(y * hpm::log(y) / 2); }

// (1+δ) log τ at a = α, written in y.
inline Real D_of(const Real& y, const Real& alpha) {
  Real ly = hpm::log(y);
  return log_tau_of(y) + ly / 2 + hpm::log(ly) / 2 - hpm::log(Real(2)) / 2 + alpha;
}

// Property (d) target: y/D · (1 − (1 + √2 √(log y / y))/D).
inline Real d_target(const Real& y, const Real& D) {
  Real ly = hpm::log(y);
  return y / D * (1 - (1 + hpm::sqrt(Real(2)) * hpm::sqrt(ly / y)) / D);
}

inline Real phase_c(const Real& y) { return y * hpm::exp(log_tau_of(y)); }

inline double dist_to_int(const Real& v) {
  Real f = v - hpm::round(v);
  return std::fabs(to_double(f));
}

}  // namespace sysdetail

// Bits needed so τ log x is resolvable mod 2π with 96 guard bits.
inline unsigned bits_needed_for(double log_tau, double log_x) {
  return static_cast<unsigned>(std::ceil(log_tau / std::log(2.0) + std::log2(log_x))) + 96;
}

inline TermReport verify_term(const ContinuousPrimeSystem& sys, int k);

// Constructs (τ_k, a_k, ν_k, x_k) for k < K. Relaxed mode takes the first admissible ξ_k with
// τ_k > T instead of ξ_k > e^{T²}.
inline std::pair<ContinuousPrimeSystem, BuildReport> build_system(const BuildOptions& opt) {
  if (opt.K < 0) fail(ErrorKind::InvalidArgument, "K must be ≥ 0");
  if (opt.tau_floor < 3) fail(ErrorKind::InvalidArgument, "tau_floor must be ≥ 3");
  ContinuousPrimeSystem sys;
  sys.K = opt.K;
  sys.ctx = opt.ctx;
  BuildReport report;
  double logT = std::log(opt.tau_floor);
  unsigned bits = opt.ctx.bits;
  for (int k = 0; k < opt.K; ++k) {
    // Rough double pass to size precision.
    double Lmin = logT;
    double y_guess = 0;
    {
      // Smallest y with log τ(y) > max(log T, L*), L* from δ < 1 at a ≤ α + 1/2.
      double alpha = std::log(6.0) + 0.5;
      double Lstar = find_root_bracketed([&](double L) { return L - std::log(L) - (alpha + 0.5); }, 2.0, 50.0, 1e-14);
      Lmin = std::max(logT, Lstar);
      if (!opt.relaxed) Lmin = std::max(Lmin, std::sqrt(std::exp(2 * logT) * std::log(std::exp(2 * logT)) / 2));
      // y log y / 2 = L² ⇒ solve in log space.
      double L2 = 2 * Lmin * Lmin;
      y_guess = find_root_bracketed([&](double ly) { return ly + std::log(ly) - std::log(L2); }, 1.0, 1e6, 1e-14);
      y_guess = std::exp(y_guess);
    }
    if (!std::isfinite(y_guess) || y_guess > 1e300) fail(ErrorKind::InsufficientPrecision, "ξ_k unrepresentable");
    if (Lmin > 1e5) fail(ErrorKind::InsufficientPrecision, "k=" + std::to_string(k) + ": log τ ≈ " + std::to_string(Lmin) +
                                                               " exceeds the precision cap");
    unsigned need = bits_needed_for(Lmin, y_guess) + 64;
    unsigned eff = opt.auto_bits ? std::max(bits, need) : bits;
    if (!opt.auto_bits && bits < need - 32)
      fail(ErrorKind::InsufficientPrecision,
           "k=" + std::to_string(k) + " needs about " + std::to_string(need) + " bits, have " + std::to_string(bits));
    PrecisionGuard guard(eff);
    Real alpha = hpm::log(Real(6)) + Real(1) / 2;
    Real two_pi = hp_two_pi();
    // y_min: log τ(y) > Lmin.
    Real L2 = 2 * Real(Lmin) * Real(Lmin);
    Real y_min = find_root_bracketed([&](const Real& y) { return Real(y * hpm::log(y) - L2); }, Real(y_guess) * Real("0.9"),
                                     Real(y_guess) * Real("1.1") + 10, Real(y_guess) * Real("1e-40"));
    y_min *= Real(1) + Real("1e-30");
    TermReport tr;
    tr.k = k;
    tr.bits = eff;
    Real target0 = sysdetail::d_target(y_min, sysdetail::D_of(y_min, alpha));
    long long n_int = static_cast<long long>(hpm::floor(target0).convert_to<long double>()) + 1;
    SystemTerm term;
    bool ok = false;
    for (int attempt = 0; attempt < 64 && !ok; ++attempt, ++n_int) {
      // Scan for a bracket of d_target(y) = n_int above y_min.
      Real lo = y_min, hi = y_min;
      auto g = [&](const Real& y) { return Real(sysdetail::d_target(y, sysdetail::D_of(y, alpha)) - Real(n_int)); };
      if (g(lo) >= 0) fail(ErrorKind::SearchFailed, "target already above integer at y_min");
      Real step = y_min / 64 + 1;
      int guard_it = 0;
      while (g(hi) < 0) {
        lo = hi;
        hi += step;
        step *= Real("1.25");
        if (++guard_it > 4000) fail(ErrorKind::SearchFailed, "no integer crossing below log ξ = " + hp_to_string(hi));
      }
      Real tol = hpm::ldexp(Real(1), -static_cast<int>(eff) + 16) * hi;
      Real y = find_root_bracketed(g, lo, hi, tol);
      tr.xi_lo = to_double(lo);
      tr.xi_hi = to_double(hi);
      // ε: smallest positive shift putting y e^{√(y log y / 2)} on the parity lattice.
      Real c_off = (k % 2 == 0) ? Real(0) : hp_pi();
      Real ph = sysdetail::phase_c(y);
      Real gap = c_off - ph;
      gap -= hpm::floor(gap / two_pi) * two_pi;
      if (gap == 0) gap = two_pi;
      Real target_phase = ph + gap;
      auto hc = [&](const Real& e) { return Real(sysdetail::phase_c(y + e) - target_phase); };
      // Mean-value guess, then a bracket that is widened until it changes sign.
      Real dphi = hpm::exp(sysdetail::log_tau_of(y)) *
                  (1 + y * (hpm::log(y) + 1) / (4 * sysdetail::log_tau_of(y)));
      Real e_hi = 2 * gap / dphi;
      while (hc(e_hi) < 0) e_hi *= 2;
      Real etol = hpm::ldexp(Real(1), -static_cast<int>(eff) + 24) * (y + 1);
      Real eps = find_root_bracketed(hc, Real(0), e_hi, etol);
      // Polish so τ log x sits on the lattice at full precision: Newton on the phase.
      Real lx1 = y + eps;
      Real dphi1 = hpm::exp(sysdetail::log_tau_of(lx1)) *
                   (1 + lx1 * (hpm::log(lx1) + 1) / (4 * sysdetail::log_tau_of(lx1)));
      for (int it = 0; it < 6; ++it) eps -= hc(eps) / dphi1;
      Real lx = y + eps;
      Real lt = sysdetail::log_tau_of(lx);
      Real tau = hpm::exp(lt);
      Real llt = hpm::log(lt);
      // η: τ(log τ + log log τ + α + η) ∈ 2πZ, linear in η.
      Real base = tau * (lt + llt + alpha);
      Real eg = -base;
      eg -= hpm::floor(eg / two_pi) * two_pi;
      if (eg == 0) eg = two_pi;
      Real eta = eg / tau;
      Real a = alpha + eta;
      Real delta = (llt + a) / lt;
      Real n_nu = hpm::ceil(2 * tau * lt / two_pi);
      Real nu = two_pi * n_nu / (tau * lt);
      term.k = k;
      term.tau = tau;
      term.log_tau = lt;
      term.a = a;
      term.delta = delta;
      term.nu = nu;
      term.log_x = lx;
      term.refresh_doubles();
      tr.epsilon = to_double(eps);
      tr.eta = to_double(eta);
      // Property (d) with the final a and log x.
      Real D = (1 + delta) * lt;
      Real dval = sysdetail::d_target(lx, D);
      tr.d_distance = sysdetail::dist_to_int(dval);
      tr.d_threshold = to_double(Real(1) / 32 / hpm::pow(lt, Real(3) / 4));
      if (tr.d_distance < tr.d_threshold) ok = true; else ++tr.skipped_crossings;
    }
    if (!ok) fail(ErrorKind::SearchFailed, "property (d) failed on 64 consecutive integer crossings");
    sys.terms.push_back(term);
    report.terms.push_back(tr);
    logT = 5 * (std::log(2.0) + term.log_tau_d);
    bits = std::max(bits, eff);
  }
  sys.ctx.bits = bits;
  sys.alpha = [&] {
    PrecisionGuard g(bits);
    return Real(hpm::log(Real(6)) + Real(1) / 2);
  }();
  for (int k = 0; k < sys.K; ++k) {
    TermReport v = verify_term(sys, k);
    auto& tr = report.terms[static_cast<size_t>(k)];
    double eps = tr.epsilon, eta = tr.eta;
    double lo = tr.xi_lo, hi = tr.xi_hi;
    int skipped = tr.skipped_crossings;
    tr = v;
    tr.epsilon = eps;
    tr.eta = eta;
    tr.xi_lo = lo;
    tr.xi_hi = hi;
    tr.skipped_crossings = skipped;
  }
  return {sys, report};
}

// Independent recomputation of every property, using a different evaluation order.
inline TermReport verify_term(const ContinuousPrimeSystem& sys, int k) {
  const SystemTerm& t = sys.term(k);
  unsigned bits = bits_of(t.tau);
  PrecisionGuard g(bits);
  TermReport r;
  r.k = k;
  r.bits = bits;
  Real two_pi = hp_two_pi();
  // (b): τ(log τ + log log τ + a) and ν τ log τ.
  Real lt = hpm::log(t.tau);
  Real vb1 = t.tau * lt + t.tau * hpm::log(lt) + t.tau * t.a;
  Real vb2 = t.nu * t.tau * lt;
  auto lattice_dist = [&](const Real& v, const Real& off) {
    Real w = v - off;
    Real q = hpm::round(w / two_pi);
    return std::fabs(to_double(w - q * two_pi));
  };
  r.residual_b_delta = lattice_dist(vb1, Real(0));
  r.residual_b_nu = lattice_dist(vb2, Real(0));
  Real vc = t.log_x * t.tau;
  r.residual_c = lattice_dist(vc, k % 2 == 0 ? Real(0) : hp_pi());
  double lg = std::max(log2_abs(vb1), std::max(log2_abs(vb2), log2_abs(vc)));
  r.residual_limit_log2 = -(static_cast<double>(bits) - lg - 8);
  // (d)
  Real D = lt + hpm::log(lt) + t.a;
  Real lx = t.log_x;
  Real dv = lx / D * (1 - (1 + hpm::sqrt(2 * hpm::log(lx) / lx)) / D);
  r.d_distance = sysdetail::dist_to_int(dv);
  r.d_threshold = to_double(1 / (32 * hpm::pow(lt, Real("0.75"))));
  // (a) compared in logs: log τ_{k+1} > 5 (log 2 + log τ_k).
  if (k + 1 < sys.K) r.a_ok = sys.term(k + 1).log_tau > 5 * (hpm::log(Real(2)) + t.log_tau);
  // (eq: xk) to a few ulps.
  Real lhs = 2 * t.log_tau * t.log_tau, rhs = lx * hpm::log(lx);
  r.xk_ok = hpm::abs(lhs - rhs) <= hpm::ldexp(rhs, -static_cast<int>(bits) + 4);
  r.delta_ok = t.delta > 0 && t.delta < 1;
  Real l6 = hpm::log(Real(6));
  r.a_range_ok = t.a >= l6 && t.a <= l6 + 1 && t.a >= hpm::log(2 * t.nu);
  r.nu_range_ok = t.nu >= 2 && t.nu <= 3;
  return r;
}

inline BuildReport verify_properties(const ContinuousPrimeSystem& sys) {
  BuildReport rep;
  for (int k = 0; k < sys.K; ++k) rep.terms.push_back(verify_term(sys, k));
  return rep;
}

struct EpsilonEtaCheck {
  int k = 0;
  double epsilon = 0, eta = 0;
  double epsilon_envelope = 0, eta_envelope = 0;
  double epsilon_ratio = 0, eta_ratio = 0;
  bool smallest_epsilon = false, smallest_eta = false;
};

// Compares ε_k, η_k with the mean-value envelopes and checks minimality on a refined grid.
inline std::vector<EpsilonEtaCheck> epsilon_bound_check(const ContinuousPrimeSystem& sys, const BuildReport& rep,
                                                        int refine = 1000) {
  std::vector<EpsilonEtaCheck> out;
  for (int k = 0; k < sys.K; ++k) {
    const SystemTerm& t = sys.term(k);
    const TermReport& tr = rep.terms.at(static_cast<size_t>(k));
    PrecisionGuard g(bits_of(t.tau));
    EpsilonEtaCheck c;
    c.k = k;
    c.epsilon = tr.epsilon;
    c.eta = tr.eta;
    Real y = t.log_x - Real(tr.epsilon);
    Real yl = y * hpm::log(y);
    c.epsilon_envelope = to_double(1 / (hpm::sqrt(yl) * hpm::exp(hpm::sqrt(yl / 2))));
    c.eta_envelope = to_double(hpm::exp(-t.log_tau));
    c.epsilon_ratio = c.epsilon / c.epsilon_envelope;
    c.eta_ratio = c.eta / c.eta_envelope;
    // Minimality: no lattice crossing strictly inside (0, ε) or (0, η).
    Real two_pi = hp_two_pi();
    Real off = (k % 2 == 0) ? Real(0) : hp_pi();
    auto crossings = [&](const Real& v0, const Real& v1) {
      Real q0 = hpm::floor((v0 - off) / two_pi), q1 = hpm::floor((v1 - off) / two_pi);
      return q1 != q0;
    };
    Real y_exact = t.log_x - Real(tr.epsilon);
    bool ok = true;
    Real prev = sysdetail::phase_c(y_exact);
    for (int i = 1; i < refine; ++i) {
      Real e = Real(tr.epsilon) * i / refine;
      Real cur = sysdetail::phase_c(y_exact + e);
      if (crossings(prev, cur)) ok = false;
      prev = cur;
    }
    c.smallest_epsilon = ok;
    Real lt = t.log_tau, llt = hpm::log(lt);
    Real base = t.tau * (lt + llt + sys.alpha);
    ok = true;
    Real prevb = base;
    for (int i = 1; i < refine; ++i) {
      Real cur = base + t.tau * (t.a - sys.alpha) * i / refine;
      Real q0 = hpm::floor(prevb / two_pi), q1 = hpm::floor(cur / two_pi);
      if (q1 != q0) ok = false;
      prevb = cur;
    }
    c.smallest_eta = ok;
    out.push_back(c);
  }
  return out;
}

// Hand-set term (toy regime): δ and ν given directly, a = δ log τ − log log τ.
inline SystemTerm make_toy_term(double tau, double delta, double nu, double log_x, unsigned bits = 256) {
  PrecisionGuard g(bits);
  SystemTerm t;
  t.k = 0;
  t.toy = true;
  t.tau = Real(tau);
  t.log_tau = hpm::log(t.tau);
  t.delta = Real(delta);
  t.a = t.delta * t.log_tau - hpm::log(t.log_tau);
  t.nu = Real(nu);
  t.log_x = Real(log_x);
  t.refresh_doubles();
  return t;
}

// Smallest τ ≥ tau0 with (1+δ) τ log τ ∈ 2πℤ, so the k-th exponential is real at s = iτ.
inline double snap_toy_tau(double tau0, double delta) {
  auto g = [&](double t) { return (1 + delta) * t * std::log(t) / (2 * std::numbers::pi); };
  double target = std::ceil(g(tau0));
  double lo = tau0, hi = tau0 + 1;
  while (g(hi) < target) hi += 1;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

inline ContinuousPrimeSystem make_toy_system(double tau, double delta, double nu, double log_x, unsigned bits = 256) {
  ContinuousPrimeSystem s;
  s.K = 1;
  s.ctx.bits = bits;
  s.terms.push_back(make_toy_term(tau, delta, nu, log_x, bits));
  PrecisionGuard g(bits);
  s.alpha = hpm::log(Real(6)) + Real(1) / 2;
  return s;
}

inline ContinuousPrimeSystem empty_system(unsigned bits = 256) {
  ContinuousPrimeSystem s;
  s.K = 0;
  s.ctx.bits = bits;
  PrecisionGuard g(bits);
  s.alpha = hpm::log(Real(6)) + Real(1) / 2;
  return s;
}

// Text manifest: header lines then one record per k with decimal values.
inline void write_manifest(std::ostream& os, const ContinuousPrimeSystem& sys) {
  os << "# continuous prime system manifest\n";
  os << "bits = " << sys.ctx.bits << "\n";
  os << "K = " << sys.K << "\n";
  os << "alpha = " << hp_to_string(sys.alpha) << "\n";
  for (const auto& t : sys.terms) {
    os << "[term " << t.k << "]\n";
    os << "toy = " << (t.toy ? 1 : 0) << "\n";
    os << "tau = " << hp_to_string(t.tau) << "\n";
    os << "a = " << hp_to_string(t.a) << "\n";
    os << "nu = " << hp_to_string(t.nu) << "\n";
    os << "log_x = " << hp_to_string(t.log_x) << "\n";
    if (t.toy) os << "delta = " << hp_to_string(t.delta) << "\n";
  }
}

inline std::string trim_copy(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n"), b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

inline ContinuousPrimeSystem read_manifest(std::istream& is) {
  ContinuousPrimeSystem sys;
  std::map<std::string, std::string> head;
  std::vector<std::map<std::string, std::string>> recs;
  std::string line;
  while (std::getline(is, line)) {
    line = trim_copy(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("[term", 0) == 0) {
      recs.emplace_back();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::InvalidArgument, "manifest line without '=': " + line);
    std::string key = trim_copy(line.substr(0, eq)), val = trim_copy(line.substr(eq + 1));
    (recs.empty() ? head : recs.back())[key] = val;
  }
  if (!head.count("bits") || !head.count("K")) fail(ErrorKind::InvalidArgument, "manifest header incomplete");
  sys.ctx.bits = static_cast<unsigned>(std::stoul(head["bits"]));
  sys.K = std::stoi(head["K"]);
  if (static_cast<int>(recs.size()) != sys.K) fail(ErrorKind::InvalidArgument, "manifest term count mismatch");
  PrecisionGuard g(sys.ctx.bits);
  sys.alpha = Real(head.count("alpha") ? head["alpha"] : "0");
  for (int k = 0; k < sys.K; ++k) {
    auto& r = recs[static_cast<size_t>(k)];
    SystemTerm t;
    t.k = k;
    t.toy = r.count("toy") && r["toy"] == "1";
    t.log_x = Real(r.at("log_x"));
    t.a = Real(r.at("a"));
    t.nu = Real(r.at("nu"));
    if (t.toy) {
      t.tau = Real(r.at("tau"));
      t.log_tau = hpm::log(t.tau);
      t.delta = Real(r.at("delta"));
    } else {
      t.log_tau = sysdetail::log_tau_of(t.log_x);
      t.tau = hpm::exp(t.log_tau);
      Real stored(r.at("tau"));
      if (hpm::abs(stored - t.tau) > hpm::ldexp(t.tau, -static_cast<int>(sys.ctx.bits) + 8))
        fail(ErrorKind::InvalidArgument, "manifest τ inconsistent with log x");
      t.delta = (hpm::log(t.log_tau) + t.a) / t.log_tau;
    }
    t.refresh_doubles();
    sys.terms.push_back(t);
  }
  return sys;
}


// dΠ_C as a Measure: dP everywhere plus τ cos(τ v) dv on each chunk (τ^{1+δ}, τ^ν]. Toy terms
// whose endpoints miss 2πZ also get the jump atoms of sin(τ log u).
inline Measure pi_c_measure(const ContinuousPrimeSystem& sys) {
  Measure m;
  m.is_signed = false;
  double prev = 0;
  auto base = [&](double a, double b) {
    if (!(a < b)) return;
    Segment s;
    s.la = a;
    s.lb = b;
    s.kind = DensityKind::RationalLog;
    m.add_segment(s);
  };
  for (const auto& t : sys.terms) {
    double la = t.B_log_tau_d(), lb = t.nu_log_tau_d();
    base(prev, la);
    Segment s;
    s.la = la;
    s.lb = lb;
    s.kind = DensityKind::SineChunkDerivative;
    s.chunk.tau = t.tau_d;
    s.chunk.tau_hp = std::make_shared<Real>(t.tau);
    s.chunk.bits = bits_of(t.tau);
    s.chunk.with_base = true;
    m.add_segment(s);
    if (t.toy) {
      double ja = s.chunk.sincos(la).first, jb = s.chunk.sincos(lb).first;
      if (std::fabs(ja) > 1e-14 && la < 700) m.atoms[std::exp(la)] += ja;
      if (std::fabs(jb) > 1e-14 && lb < 700) m.atoms[std::exp(lb)] -= jb;
      if (ja < 0 || jb > 0) m.is_signed = true;
    }
    prev = lb;
  }
  base(prev, std::numeric_limits<double>::infinity());
  return m;
}

// Lower bound for the density of Π_C per du on a chunk: 1/(2ν log τ) − τ^{−δ} (in u, not v).
inline double pi_c_density_lower_bound(const SystemTerm& t) {
  return 1.0 / (2 * t.nu_d * t.log_tau_d) - std::exp(-t.delta_d * t.log_tau_d);
}

}  // namespace beurling
