#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/special.hpp"
#include "beurling/system/system.hpp"

namespace beurling {

enum class ZetaMode { Full, Primed, Discrete };

// s = i T0 + w with T0 held exactly. Phases of τ_j^{−(1+δ_j) i T0} and τ_j^{−ν_j i T0} are reduced
// once at full precision; everything relative to the frame is double.
struct ZetaFrame {
  Real T0;
  double T0_d = 0;
  std::vector<double> phase_B, phase_N;  // −(1+δ)log τ · T0 and −ν log τ · T0, mod 2π
  std::vector<double> d_up, d_lo;        // T0 − τ_j and T0 + τ_j
};

// (e^z − 1)/z.
inline cplx exprel(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
  return cexpm1(z) / z;
}

// −log(1 − z), accurate for small |z|.
inline cplx neg_log1m(cplx z) {
  if (std::abs(z) < 1e-3) {
    cplx r = 0, p = z;
    for (int n = 1; n < 12; ++n, p *= z) r += p / static_cast<double>(n);
    return r;
  }
  return -std::log(1.0 - z);
}

class ZetaEvaluator {
 public:
  ZetaEvaluator() = default;
  explicit ZetaEvaluator(ContinuousPrimeSystem sys, ZetaMode mode = ZetaMode::Full, int k_excluded = -1)
      : sys_(std::move(sys)), mode_(mode), k_excl_(k_excluded) {
    if (mode_ == ZetaMode::Primed && (k_excl_ < 0 || k_excl_ >= sys_.K))
      fail(ErrorKind::InvalidArgument, "primed mode needs 0 ≤ k < K");
  }
  static ZetaEvaluator discrete(std::vector<std::pair<double, int>> primes) {
    ZetaEvaluator z;
    z.mode_ = ZetaMode::Discrete;
    z.primes_ = std::move(primes);
    z.sys_ = empty_system();
    return z;
  }

  const ContinuousPrimeSystem& system() const { return sys_; }
  ZetaMode mode() const { return mode_; }
  int k_excluded() const { return k_excl_; }

  ZetaFrame frame(const Real& T0) const {
    ZetaFrame f;
    unsigned bits = std::max<unsigned>(sys_.ctx.bits, 128);
    for (auto& t : sys_.terms) bits = std::max(bits, bits_of(t.tau));
    double mag = std::fabs(to_double(T0));
    for (auto& t : sys_.terms)
      bits = std::max(bits, static_cast<unsigned>(std::log2(mag * t.nu_log_tau_d() + 2) + 96));
    PrecisionGuard g(bits);
    f.T0 = T0;
    f.T0_d = to_double(T0);
    for (auto& t : sys_.terms) {
      Real BL = t.log_tau + hpm::log(t.log_tau) + t.a;
      if (t.toy) BL = (1 + t.delta) * t.log_tau;
      f.phase_B.push_back(reduce_mod_2pi(-BL * T0).r);
      f.phase_N.push_back(reduce_mod_2pi(-t.nu * t.log_tau * T0).r);
      f.d_up.push_back(to_double(T0 - t.tau));
      f.d_lo.push_back(to_double(T0 + t.tau));
    }
    return f;
  }

  // Frame for a plain double s: exact when |ν log τ · t| stays small, otherwise via mpfr.
  ZetaFrame frame_for(double t) const { return frame(Real(t)); }

  // Σ_k of the chunk terms (log ζ_C − log(s/(s−1))), honoring the mode's exclusions.
  cplx chunk_sum(const ZetaFrame& f, cplx w, bool exclude_upper_pair_k = false, int k = -1) const {
    cplx acc = 0;
    for (size_t j = 0; j < sys_.terms.size(); ++j) {
      const auto& t = sys_.terms[j];
      double BL = t.B_log_tau_d(), NL = t.nu_log_tau_d(), L = t.log_tau_d;
      bool drop_B = mode_ == ZetaMode::Primed && static_cast<int>(j) == k_excl_;
      bool drop_upper = exclude_upper_pair_k && static_cast<int>(j) == k;
      cplx zB = cplx(L, f.phase_B[j]) - BL * w;
      cplx zN = cplx(L, f.phase_N[j]) - NL * w;
      check_overflow(zB, zN);
      // Upper pair over s − iτ.
      if (!drop_upper) {
        cplx den(w.real(), w.imag() + f.d_up[j]);
        if (drop_B) {
          if (den == cplx(0)) fail(ErrorKind::PoleAtITau, "s = iτ_k");
          acc -= 0.5 * std::exp(zN) / den;
        } else {
          // Ratio of the two exponentials, rewritten about s = iτ_j: e^{z} with z = i c − (ν−1−δ) log τ (s − iτ_j),
          // c the phase mismatch at s = iτ_j (zero under (b)).
          double c = wrap_pi(f.phase_N[j] - f.phase_B[j] + (NL - BL) * f.d_up[j]);
          if (den == cplx(0) && c != 0) fail(ErrorKind::PoleAtITau, "s = iτ_j with unmatched phases");
          cplx z = cplx(0, c) - (NL - BL) * den;
          cplx z_over_den = den == cplx(0) ? cplx(-(NL - BL)) : z / den;
          acc += -0.5 * std::exp(zB) * exprel(z) * z_over_den;
        }
      }
      // Lower pair over s + iτ.
      cplx den(w.real(), w.imag() + f.d_lo[j]);
      acc += 0.5 * (std::exp(zB) - std::exp(zN)) / den;
    }
    return acc;
  }

  cplx log_zeta(const ZetaFrame& f, cplx w) const {
    cplx s(w.real(), f.T0_d + w.imag());
    check_domain(s);
    if (mode_ == ZetaMode::Discrete) return discrete_log(s);
    return log_ratio(s) + chunk_sum(f, w);
  }

  cplx log_zeta(cplx s) const {
    check_domain(s);
    if (mode_ == ZetaMode::Discrete) return discrete_log(s);
    return log_zeta(frame_for(s.imag()), cplx(s.real(), 0));
  }

  // exp(log ζ); evaluated as s/(s−1)·exp(Σ) so the segment (0,1) is allowed.
  cplx zeta(cplx s) const {
    if (s == cplx(1, 0)) fail(ErrorKind::PoleAt1, "s = 1");
    if (mode_ == ZetaMode::Discrete) return std::exp(discrete_log(s));
    ZetaFrame f = frame_for(s.imag());
    return s / (s - 1.0) * std::exp(chunk_sum(f, cplx(s.real(), 0)));
  }

  // Certified bound for the notional terms j ≥ K: by (a), Σ_{j≥K} τ_j^{−1/2} ≤ 2 (2τ_{K−1})^{−5/2}.
  double tail_bound() const {
    if (sys_.K == 0) return 0;
    return 2 * std::exp(-2.5 * (std::log(2.0) + sys_.terms.back().log_tau_d));
  }

 private:
  ContinuousPrimeSystem sys_;
  ZetaMode mode_ = ZetaMode::Full;
  int k_excl_ = -1;
  std::vector<std::pair<double, int>> primes_;

  static void check_overflow(cplx a, cplx b) {
    if (a.real() > 700 || b.real() > 700) fail(ErrorKind::Overflow, "chunk term exceeds double range");
  }

  static void check_domain(cplx s) {
    if (s == cplx(1, 0)) fail(ErrorKind::PoleAt1, "s = 1");
    if (s.imag() == 0 && s.real() >= 0 && s.real() <= 1) fail(ErrorKind::BranchCut, "s on [0,1]");
  }

  static cplx log_ratio(cplx s) {
    // log s − log(s−1) = −log(1 − 1/s), principal branches, off [0,1].
    if (std::abs(s) > 4) return neg_log1m(1.0 / s);
    return std::log(s) - std::log(s - 1.0);
  }

  cplx discrete_log(cplx s) const {
    cplx acc = 0;
    for (auto [p, m] : primes_) acc += static_cast<double>(m) * neg_log1m(std::exp(-s * std::log(p)));
    return acc;
  }
};

struct ResidueValue {
  double rho = 0;
  double rho_limit = 0;   // Richardson limit of h ζ(1+h)
  double rho_circle = 0;  // (1/2πi)∮ ζ
  double rel_diff = 0;
};

inline ResidueValue residue_at_1(const ZetaEvaluator& z, double tol = 1e-8) {
  ResidueValue r;
  const double hs[3] = {1e-3, 1e-4, 1e-5};
  double F[3];
  for (int i = 0; i < 3; ++i) F[i] = (hs[i] * z.zeta(cplx(1 + hs[i], 0))).real();
  // Neville interpolation to h = 0.
  double p01 = (hs[1] * F[0] - hs[0] * F[1]) / (hs[1] - hs[0]);
  double p12 = (hs[2] * F[1] - hs[1] * F[2]) / (hs[2] - hs[1]);
  r.rho_limit = (hs[2] * p01 - hs[0] * p12) / (hs[2] - hs[0]);
  const int N = 256;
  const double rad = 1e-2;
  cplx acc = 0;
  for (int i = 0; i < N; ++i) {
    double th = 2 * std::numbers::pi * (i + 0.5) / N;
    cplx e(std::cos(th), std::sin(th));
    acc += z.zeta(1.0 + rad * e) * rad * e;
  }
  r.rho_circle = (acc / static_cast<double>(N)).real();
  r.rho = r.rho_circle;
  r.rel_diff = std::fabs(r.rho_limit - r.rho_circle) / std::fabs(r.rho_circle);
  if (!(r.rel_diff <= tol))
    fail(ErrorKind::MethodsDisagree, "residue methods differ by " + std::to_string(r.rel_diff));
  if (!(r.rho > 0)) fail(ErrorKind::ConditionViolated, "residue not positive");
  return r;
}

enum class GhlRegion { HL, Strip };

struct GhlOptions {
  int t_samples = 1000;
  double sigma_step = 1.0 / 256;
  double sigma_span = 2.0;      // sampled σ range above the region's left boundary
  double t_max_log = 0;         // 0: 5 log τ_{K−1} (HL) or 5 log τ_k (strip)
  int window_samples = 801;     // dense samples around each τ_j inside the t range
  double window_halfwidth = 20; // in units of 1/log τ_j
};

struct GhlReport {
  GhlRegion region = GhlRegion::HL;
  int k = -1;
  double empirical_sup = 0;
  double envelope = 0;
  double ratio = 0;
  bool pass = true;
  double sup_sigma = 0, sup_t = 0;
  long samples = 0;
};

// Empirical sup of the chunk sum over a sampled region versus the analytic envelope.
inline GhlReport ghl_bound_certificate(const ZetaEvaluator& z, GhlRegion region, int k = -1,
                                       const GhlOptions& opt = {}) {
  const auto& sys = z.system();
  GhlReport rep;
  rep.region = region;
  rep.k = k;
  if (sys.K == 0) {
    rep.envelope = region == GhlRegion::HL ? 1.0 : 0.0;
    return rep;
  }
  if (region == GhlRegion::Strip && (k < 0 || k >= sys.K)) fail(ErrorKind::InvalidArgument, "strip needs 0 ≤ k < K");
  for (auto& t : sys.terms)
    rep.envelope += region == GhlRegion::HL ? std::sqrt(1 / (t.tau_d * t.log_tau_d)) : std::exp(-t.log_tau_d / 3);
  if (region == GhlRegion::HL) rep.envelope += 1;
  double lt_lo, lt_hi;
  if (region == GhlRegion::HL) {
    lt_lo = std::exp(1.0);
    lt_hi = opt.t_max_log > 0 ? opt.t_max_log : 5 * sys.terms.back().log_tau_d;
  } else {
    lt_lo = sys.term(k).log_tau_d / 5;
    lt_hi = opt.t_max_log > 0 ? opt.t_max_log : 5 * sys.term(k).log_tau_d;
  }
  auto sigma_left = [&](double t) {
    if (region == GhlRegion::Strip) return 0.5;
    double lt = std::log(t);
    return 1 - std::log(lt) / lt;
  };
  struct Sample {
    Real T0;
    double offset;
  };
  std::vector<Sample> samples;
  for (int i = 0; i < opt.t_samples; ++i) {
    double lt = lt_lo + (lt_hi - lt_lo) * i / std::max(1, opt.t_samples - 1);
    samples.push_back({Real(std::exp(lt)), 0.0});
  }
  for (auto& t : sys.terms) {
    if (t.log_tau_d < lt_lo || t.log_tau_d > lt_hi) continue;
    for (int i = 0; i < opt.window_samples; ++i) {
      double u = -opt.window_halfwidth + 2 * opt.window_halfwidth * i / std::max(1, opt.window_samples - 1);
      samples.push_back({t.tau, u / t.log_tau_d});
    }
  }
  bool excl = region == GhlRegion::Strip;
  for (auto& sm : samples) {
    ZetaFrame f = z.frame(sm.T0);
    double t = f.T0_d + sm.offset;
    double s0 = sigma_left(t);
    for (double sg = s0; sg <= s0 + opt.sigma_span + 1e-12; sg += opt.sigma_step) {
      double v = std::abs(z.chunk_sum(f, cplx(sg, sm.offset), excl, k));
      ++rep.samples;
      if (v > rep.empirical_sup) {
        rep.empirical_sup = v;
        rep.sup_sigma = sg;
        rep.sup_t = t;
      }
    }
  }
  rep.ratio = rep.envelope > 0 ? rep.empirical_sup / rep.envelope : 0;
  rep.pass = rep.empirical_sup <= 1.05 * rep.envelope;
  return rep;
}

inline void write_log_zeta_csv(std::ostream& os, const ZetaEvaluator& z, const std::vector<cplx>& points) {
  os << "sigma,t,re_log_zeta,im_log_zeta\n";
  os.precision(17);
  for (auto s : points) {
    cplx v = z.log_zeta(s);
    os << s.real() << ',' << s.imag() << ',' << v.real() << ',' << v.imag() << '\n';
  }
}

}  // namespace beurling
