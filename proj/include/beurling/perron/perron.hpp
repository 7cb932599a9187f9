#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/quadrature.hpp"
#include "beurling/numeric/special.hpp"
#include "beurling/numeric/split_exp.hpp"
#include "beurling/saddle/saddle.hpp"
#include "beurling/zeta/zeta.hpp"

namespace beurling {

struct PerronOptions {
  double rel_tol = 1e-10;          // per-panel quadrature, relative to the panel's magnitude
  double abs_tol = 0;              // absolute target for ∫F ds over a segment, shared across panels by length
  double tail_rel_tol = 1e-5;      // vertical tail bound against x²/2
  double T_cut = 0;                // 0: max(10³, x), doubled until the tail bound fits
  double T_cap = 1e8;
  double max_oscillations = 2e5;   // longer segments are measured as ∫|F||ds|
  double oscillations_per_panel = 8;
  bool subtract_pole_part = true;  // vertical, continuous systems: integrate x^{s+1}(e^Σ − 1)/(s²−1)
  unsigned threads = 1;
};

struct PerronResult {
  double log_x = 0, kappa = 0, T_cut = 0;
  double residue_term = 0;   // closed-form part: (x²−1)/2 when the pole part is subtracted, else 0
  double contour_value = 0;  // (1/π) Im ∫_κ^{κ+iT} ds
  double tail_bound = 0;
  double quad_error = 0;
  double total = 0;
};

namespace perron_detail {

inline void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

inline double hl_sigma(double t) {
  const double ee = std::exp(std::numbers::e);
  if (t < ee) return 1 - 1 / std::numbers::e;
  double lt = std::log(t);
  return 1 - std::log(lt) / lt;
}

inline double hl_dsigma(double t) {
  const double ee = std::exp(std::numbers::e);
  if (t < ee) return 0;
  double lt = std::log(t);
  return -(1 - std::log(lt)) / (lt * lt * t);
}

}  // namespace perron_detail

// x^{s+1}/((s−1)(s+1))·exp(Σ) and its variants, as e^{L}·mult with L carrying the size.
class PerronIntegrand {
 public:
  enum class Kind { Full, PoleSubtracted, Discrete };

  struct Frame {
    Real T0;
    double T0_d = 0;
    double phase_lx = 0;  // T0 log x mod 2π
    ZetaFrame zf;
  };

  PerronIntegrand(const ZetaEvaluator& z, double log_x, Kind kind) : z_(z), lx_(log_x), kind_(kind) {
    if (z.mode() == ZetaMode::Discrete) kind_ = Kind::Discrete;
  }

  double log_x() const { return lx_; }
  Kind kind() const { return kind_; }
  const ZetaEvaluator& zeta() const { return z_; }

  Frame frame(const Real& T0) const {
    Frame f;
    if (kind_ == Kind::Discrete) {
      // Only x^{it} needs reducing; below 10⁸ the double product is good to ~1e−8 rad.
      f.T0_d = to_double(T0);
      if (std::fabs(f.T0_d * lx_) < 1e8) {
        f.T0 = T0;
        f.phase_lx = std::fmod(f.T0_d * lx_, 2 * std::numbers::pi);
        return f;
      }
    }
    unsigned bits = std::max<unsigned>(128, static_cast<unsigned>(std::log2(std::fabs(to_double(T0)) * lx_ + 2) + 96));
    bits = std::max(bits, bits_of(T0));
    PrecisionGuard g(bits);
    f.T0 = T0;
    f.T0_d = to_double(T0);
    f.phase_lx = reduce_mod_2pi(T0 * Real(lx_)).r;
    if (kind_ != Kind::Discrete) f.zf = z_.frame(T0);
    return f;
  }

  // F(σ + i(T0 + dt)) = e^{L} · mult.
  void eval(const Frame& f, double sigma, double dt, cplx& L, cplx& mult) const {
    cplx s(sigma, f.T0_d + dt);
    cplx base((sigma + 1) * lx_, f.phase_lx + dt * lx_);
    mult = 1.0;
    switch (kind_) {
      case Kind::Full:
        L = base + z_.chunk_sum(f.zf, cplx(sigma, dt)) - std::log(s - 1.0) - std::log(s + 1.0);
        break;
      case Kind::PoleSubtracted:
        L = base - std::log(s - 1.0) - std::log(s + 1.0);
        mult = cexpm1(z_.chunk_sum(f.zf, cplx(sigma, dt)));
        break;
      case Kind::Discrete:
        L = base + z_.log_zeta(s) - std::log(s) - std::log(s + 1.0);
        break;
    }
  }

  double log_abs(const Frame& f, double sigma, double dt) const {
    cplx L, m;
    eval(f, sigma, dt, L, m);
    return L.real() + std::log(std::abs(m));
  }

 private:
  const ZetaEvaluator& z_;
  double lx_;
  Kind kind_;
};

enum class SegmentRole {
  HLMinus, Delta4Minus, Delta3Minus, Delta2Minus, Delta1Minus, Delta0Minus,
  Descent, UpsilonV, UpsilonH,
  Delta0Plus, Delta1Plus, Delta2Plus, Delta3Plus, Delta4Plus, HLPlus,
  Closing, VerticalLine
};

inline const char* role_name(SegmentRole r) {
  switch (r) {
    case SegmentRole::HLMinus: return "GammaHL-";
    case SegmentRole::Delta4Minus: return "Delta4-";
    case SegmentRole::Delta3Minus: return "Delta3-";
    case SegmentRole::Delta2Minus: return "Delta2-";
    case SegmentRole::Delta1Minus: return "Delta1-";
    case SegmentRole::Delta0Minus: return "Delta0-";
    case SegmentRole::Descent: return "Gamma_m";
    case SegmentRole::UpsilonV: return "Upsilon_m.v";
    case SegmentRole::UpsilonH: return "Upsilon_m.h";
    case SegmentRole::Delta0Plus: return "Delta0+";
    case SegmentRole::Delta1Plus: return "Delta1+";
    case SegmentRole::Delta2Plus: return "Delta2+";
    case SegmentRole::Delta3Plus: return "Delta3+";
    case SegmentRole::Delta4Plus: return "Delta4+";
    case SegmentRole::HLPlus: return "GammaHL+";
    case SegmentRole::Closing: return "closing";
    case SegmentRole::VerticalLine: return "vertical";
  }
  return "?";
}

struct ContourSegment {
  SegmentRole role = SegmentRole::VerticalLine;
  SegmentKind kind = SegmentKind::Vertical;
  int m = 0;
  double sigma_a = 0, sigma_b = 0;  // horizontal: a → b at height t_a; vertical: σ = sigma_a
  Real t_a, t_b;                     // vertical and arcs run upward from t_a to t_b
  bool to_infinity = false;

  std::string tag() const {
    std::string s = role_name(role);
    if (role == SegmentRole::Descent || role == SegmentRole::UpsilonV || role == SegmentRole::UpsilonH) {
      auto p = s.find("_m");
      s.replace(p, 2, "_" + std::to_string(m));
    }
    return s;
  }
  double start_sigma() const { return kind == SegmentKind::HLArc ? perron_detail::hl_sigma(to_double(t_a)) : sigma_a; }
  double end_sigma() const {
    if (kind == SegmentKind::HLArc) return to_infinity ? 1.0 : perron_detail::hl_sigma(to_double(t_b));
    if (kind == SegmentKind::Horizontal || kind == SegmentKind::Descent) return sigma_b;
    return sigma_a;
  }
  const Real& start_t() const { return t_a; }
  const Real& end_t() const { return kind == SegmentKind::Horizontal ? t_a : t_b; }
};

struct SegmentValue {
  SplitComplex value;      // ∫ F ds
  bool abs_only = false;   // value not formed; log_abs is log ∫|F||ds|
  double log_abs = -INFINITY;
  double log_error = -INFINITY;
  size_t panels = 0;
};

// Integrates F along one segment. Long oscillatory segments fall back to ∫|F||ds|.
inline SegmentValue integrate_segment(const PerronIntegrand& I, const ContourSegment& seg, const PerronOptions& opt) {
  using namespace perron_detail;
  SegmentValue out;
  const double lx = I.log_x();
  auto add = [&](cplx v, double ref, double err) {
    out.value = out.value + SplitComplex{v, ref}.normalized();
    if (err > 0) out.log_error = log_add_exp(out.log_error, std::log(err) + ref);
  };
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol;
  qo.initial_panels = 2;

  if (seg.kind == SegmentKind::Horizontal) {
    auto f = I.frame(seg.t_a);
    double a = seg.sigma_a, b = seg.sigma_b;
    if (a == b) return out;
    double ref = -INFINITY;
    for (int i = 0; i <= 8; ++i) ref = std::max(ref, I.log_abs(f, a + (b - a) * i / 8, 0));
    qo.abs_tol = opt.rel_tol * std::fabs(b - a) * 1e-3;
    auto r = integrate_gk([&](double sg) {
      cplx L, m;
      I.eval(f, sg, 0, L, m);
      return std::exp(L - ref) * m;
    }, std::min(a, b), std::max(a, b), qo);
    cplx v = (b > a ? 1.0 : -1.0) * r.value;
    add(v, ref, r.error);
    out.log_abs = out.value.log_abs();
    out.panels = 1;
    return out;
  }

  // Vertical or arc: t runs from t_a upward.
  auto sigma_of = [&](double t_abs) { return seg.kind == SegmentKind::HLArc ? hl_sigma(t_abs) : seg.sigma_a; };
  auto dsigma_of = [&](double t_abs) { return seg.kind == SegmentKind::HLArc ? hl_dsigma(t_abs) : 0.0; };
  double len = seg.to_infinity ? INFINITY : to_double(seg.t_b - seg.t_a);
  if (!(len > 0)) return out;
  double oscillations = lx * len / (2 * std::numbers::pi);

  if (!seg.to_infinity && oscillations <= opt.max_oscillations) {
    double pw = std::min(opt.oscillations_per_panel * 2 * std::numbers::pi / lx, 2.0);
    size_t n = static_cast<size_t>(std::ceil(len / pw));
    double w = len / static_cast<double>(n);
    std::vector<PerronIntegrand::Frame> frames(n);
    {
      PrecisionGuard g(std::max(bits_of(seg.t_a), 128u));
      for (size_t i = 0; i < n; ++i) frames[i] = I.frame(seg.t_a + Real(w * (static_cast<double>(i) + 0.5)));
    }
    std::vector<cplx> vals(n);
    std::vector<double> refs(n), errs(n);
    parallel_for(n, opt.threads, [&](size_t i) {
      const auto& f = frames[i];
      double ref = -INFINITY;
      for (int j = 0; j <= 4; ++j) {
        double dt = -w / 2 + w * j / 4;
        ref = std::max(ref, I.log_abs(f, sigma_of(f.T0_d + dt), dt));
      }
      if (!std::isfinite(ref)) {
        vals[i] = 0;
        refs[i] = 0;
        errs[i] = 0;
        return;
      }
      QuadOptions q = qo;
      q.abs_tol = opt.rel_tol * w;
      if (opt.abs_tol > 0) q.abs_tol = std::max(q.abs_tol, opt.abs_tol * (w / len) * std::exp(-ref));
      auto r = integrate_gk([&](double dt) {
        double t = f.T0_d + dt;
        cplx L, m;
        I.eval(f, sigma_of(t), dt, L, m);
        return std::exp(L - ref) * m * cplx(dsigma_of(t), 1.0);
      }, -w / 2, w / 2, q);
      vals[i] = r.value;
      refs[i] = ref;
      errs[i] = r.error;
    });
    for (size_t i = 0; i < n; ++i) add(vals[i], refs[i], errs[i]);
    out.log_abs = out.value.log_abs();
    out.panels = n;
    return out;
  }

  // ∫|F||ds| by pieces anchored at the ends and at each τ_j inside; one frame per anchor, offsets in double.
  // Away from its anchor a piece sits far from every τ_j, where the chunk terms are small enough that the
  // double phase error does not matter for |F|.
  out.abs_only = true;
  std::vector<Real> anchors{seg.t_a};
  {
    PrecisionGuard pg(std::max(bits_of(seg.t_a), 128u));
    for (const auto& term : I.zeta().system().terms)
      if (term.tau > seg.t_a && (seg.to_infinity || term.tau < seg.t_b)) anchors.push_back(term.tau);
    std::sort(anchors.begin() + 1, anchors.end());
    if (!seg.to_infinity) anchors.push_back(seg.t_b);
  }
  std::vector<PerronIntegrand::Frame> frames;
  for (const auto& a : anchors) frames.push_back(I.frame(a));
  double total = -INFINITY;
  // One sweep from anchor f in direction dir over offsets h0 (e^v − 1) ≤ span.
  auto sweep = [&](const PerronIntegrand::Frame& f, double dir, double span, bool open_end) {
    double h0 = std::min(0.1, span / 2);
    double v_end = std::isfinite(span) ? std::log1p(span / h0) : 700.0;
    auto g = [&](double v) {
      double dt = dir * h0 * std::expm1(v);
      double t = f.T0_d + dt;
      return I.log_abs(f, sigma_of(t), dt) + std::log(std::hypot(dsigma_of(t), 1.0)) + std::log(h0) + v;
    };
    for (double v0 = 0; v0 < v_end; v0 += 1.0) {
      double v1 = std::min(v_end, v0 + 1.0);
      double ref = std::max({g(v0), g(0.5 * (v0 + v1)), g(v1)});
      QuadOptions q = qo;
      q.abs_tol = 0;
      q.rel_tol = 1e-8;
      auto r = integrate_gk([&](double v) { return cplx(std::exp(g(v) - ref), 0); }, v0, v1, q);
      double piece = std::log(std::real(r.value)) + ref;
      total = log_add_exp(total, piece);
      ++out.panels;
      if (open_end && v0 > 8 && piece < total - 45) break;
    }
  };
  for (size_t i = 0; i < anchors.size(); ++i) {
    bool last = i + 1 == anchors.size();
    if (last) {
      if (seg.to_infinity) sweep(frames[i], 1.0, INFINITY, true);
      break;
    }
    double gap;
    {
      PrecisionGuard pg(std::max(bits_of(anchors[i]), 128u));
      gap = to_double(anchors[i + 1] - anchors[i]);
    }
    sweep(frames[i], 1.0, gap / 2, false);
    sweep(frames[i + 1], -1.0, gap / 2, false);
  }
  out.log_abs = total;
  out.value = SplitComplex{cplx(1, 0), total};
  return out;
}

// Bounds for |Σ(κ+it)|, t ≥ T: A + C/t.
inline void sigma_tail_constants(const ContinuousPrimeSystem& sys, double kappa, double T, double& A, double& C) {
  A = 0;
  C = 0;
  for (auto& t : sys.terms) {
    double c = 0.5 * (std::exp(t.log_tau_d - t.B_log_tau_d() * kappa) + std::exp(t.log_tau_d - t.nu_log_tau_d() * kappa));
    if (T >= 2 * t.tau_d) {
      C += 3 * c;
    } else {
      A += c / kappa;
      C += c;
    }
  }
}

inline PerronResult perron_vertical(const ZetaEvaluator& z, double log_x, double kappa, PerronOptions opt = {}) {
  if (!(kappa > 1)) fail(ErrorKind::InvalidArgument, "κ must exceed 1");
  PerronResult res;
  res.log_x = log_x;
  res.kappa = kappa;
  const bool discrete = z.mode() == ZetaMode::Discrete;
  const bool subtract = !discrete && opt.subtract_pole_part;
  const double x = std::exp(log_x);
  const double scale = std::max(1.0, x * x / 2);
  const double tol = opt.tail_rel_tol * scale;
  const double logxk = (kappa + 1) * log_x;

  double zk = 0;
  if (discrete) zk = std::exp(z.log_zeta(cplx(kappa, 0)).real());
  auto tail = [&](double T) {
    if (discrete) return std::exp(logxk) * zk / (std::numbers::pi * T);
    double A, C;
    sigma_tail_constants(z.system(), kappa, T, A, C);
    double e = std::exp(A + C / T);
    if (subtract) return std::exp(logxk) * e * (A / T + C / (2 * T * T)) / std::numbers::pi;
    return std::exp(logxk) * e / (std::numbers::pi * T);
  };
  double T = opt.T_cut > 0 ? opt.T_cut : std::max(1e3, x);
  while (tail(T) > tol) {
    T *= 2;
    if (T > opt.T_cap) fail(ErrorKind::TailTooLarge, "vertical Perron tail needs T > " + std::to_string(opt.T_cap));
  }
  res.T_cut = T;
  res.tail_bound = tail(T);

  PerronIntegrand I(z, log_x, subtract ? PerronIntegrand::Kind::PoleSubtracted : PerronIntegrand::Kind::Full);
  ContourSegment seg;
  seg.kind = SegmentKind::Vertical;
  seg.sigma_a = seg.sigma_b = kappa;
  {
    PrecisionGuard g(128);
    seg.t_a = Real(0);
    seg.t_b = Real(T);
  }
  PerronOptions o = opt;
  o.max_oscillations = INFINITY;
  if (o.abs_tol == 0) o.abs_tol = 1e-2 * std::numbers::pi * tol;
  SegmentValue v = integrate_segment(I, seg, o);
  res.contour_value = v.value.is_zero() ? 0.0 : v.value.to_cplx().imag() / std::numbers::pi;
  res.quad_error = std::exp(v.log_error) / std::numbers::pi;
  res.residue_term = subtract ? (x * x - 1) / 2 : 0.0;
  res.total = res.residue_term + res.contour_value;
  return res;
}

// (1/π) Im ∫_κ^{κ+iT} F ds with no tail; the common-height comparison for the composite contour.
inline double perron_vertical_truncated(const ZetaEvaluator& z, double log_x, double kappa, const Real& T,
                                        const PerronOptions& opt, double* err = nullptr) {
  PerronIntegrand I(z, log_x, PerronIntegrand::Kind::Full);
  ContourSegment seg;
  seg.kind = SegmentKind::Vertical;
  seg.sigma_a = seg.sigma_b = kappa;
  seg.t_a = Real(0);
  seg.t_b = T;
  PerronOptions o = opt;
  o.max_oscillations = INFINITY;
  SegmentValue v = integrate_segment(I, seg, o);
  if (err) *err = std::exp(v.log_error) / std::numbers::pi;
  return v.value.to_cplx().imag() / std::numbers::pi;
}

struct CDoublePrime {
  double value = 0;
  double c_prime = 0;   // 1/√(1 + (d/σ_0)²) = 1 − c′ (llx/lx)^{1/3}
  double d_min = 0;     // smallest |t − τ| in the window
  double A0 = 0;        // ½ τ^{1−(1+δ)σ_0}/σ_0
  double sup_value = 0; // sup over |t − τ| ≥ d_min of ½ τ^{1−(1+δ)σ_0}/|σ_0 + i(t−τ)|
};

// Largest c″ with sup_{|t−τ| ≥ d} ½τ^{1−(1+δ)σ_0}/|σ_0 + i(t−τ)| ≤ A_0 − c″ (lx/llx)^{1/6}.
inline CDoublePrime compute_c_doubleprime(const SaddleProblem& P, double sigma0, double d_min) {
  CDoublePrime c;
  double lx = P.log_x(), llx = std::log(lx);
  c.d_min = d_min;
  c.A0 = 0.5 * std::exp(P.log_tau() - P.BL() * sigma0) / sigma0;
  double r = 1 / std::sqrt(1 + (d_min / sigma0) * (d_min / sigma0));
  c.sup_value = c.A0 * r;
  c.c_prime = (1 - r) / std::cbrt(llx / lx);
  c.value = (c.A0 - c.sup_value) / std::pow(lx / llx, 1.0 / 6);
  return c;
}

// Window |t − τ| ≥ c π √2 (llx/lx)^{1/6} for a window constant c.
inline double window_from_c(const SaddleProblem& P, double c) {
  double lx = P.log_x();
  return c * std::numbers::pi * std::sqrt(2.0) * std::pow(std::log(lx) / lx, 1.0 / 6);
}

struct CompositeGeometry {
  double sigma0 = 0, sigma_prime = 0, kappa = 1.5;
  CDoublePrime cdp;
  Real tau, T1m, T1p, T2m, T2p, T3m, T3p;
  int m_lo = 0, m_hi = 0;
  std::vector<SaddlePoint> saddles;
  std::vector<DescentPath> paths;
  std::vector<ContourSegment> segments;
  std::optional<Real> t_top;
  bool sigma_prime_below_sigma0 = false;
  bool t2_outside_t1 = false;
  bool closes = false;  // consecutive endpoints coincide
  double max_gap = 0;
};

struct CompositeOptions {
  int m_max = -1;                 // −1: the saddle problem's m_max
  std::optional<Real> t_top;      // clip the contour and close horizontally to κ
  double kappa = 1.5;
  bool throw_on_dominates = false;  // SegmentDominates instead of a report entry
  PerronOptions perron;
};

inline CompositeGeometry build_composite_geometry(const SaddleProblem& P, const CompositeOptions& co) {
  CompositeGeometry g;
  const SystemTerm& term = P.system().term(P.k());
  unsigned bits = std::max(P.bits(), bits_of(term.tau));
  PrecisionGuard pg(bits);
  g.kappa = co.kappa;
  int mm = co.m_max >= 0 ? co.m_max : P.m_max();
  g.m_lo = -mm;
  g.m_hi = mm;
  for (int m = g.m_lo; m <= g.m_hi; ++m) {
    g.saddles.push_back(P.find_saddle(m));
    g.paths.push_back(P.trace_descent(m, g.saddles.back()));
  }
  const SaddlePoint& s0 = g.saddles[static_cast<size_t>(-g.m_lo)];
  g.sigma0 = s0.sigma;
  g.tau = term.tau;
  g.T1m = g.tau + Real(P.t_minus(g.m_lo));
  g.T1p = g.tau + Real(P.t_plus(g.m_hi));
  g.cdp = compute_c_doubleprime(P, g.sigma0, P.t_plus(g.m_hi));
  double lx = P.log_x(), llx = std::log(lx);
  double d2 = std::exp(g.cdp.value / 2 * std::pow(lx / llx, 1.0 / 6));
  g.T2m = g.tau - Real(d2);
  g.T2p = g.tau + Real(d2);
  g.t2_outside_t1 = d2 > P.t_plus(g.m_hi) && d2 > -P.t_minus(g.m_lo);
  g.sigma_prime = (1 - std::sqrt(2.0) / 2 * g.cdp.value / (std::cbrt(lx) * std::pow(llx, 2.0 / 3))) / (1 + term.delta_d);
  g.sigma_prime_below_sigma0 = g.sigma_prime < g.sigma0;
  g.T3m = hpm::pow(g.tau, Real(1) / 5);
  g.T3p = hpm::pow(g.tau, 5);
  if (!(g.T3m < g.T2m)) fail(ErrorKind::ConditionViolated, "τ^{1/5} ≥ T_2^−");

  auto vert = [](SegmentRole r, double sg, const Real& a, const Real& b) {
    ContourSegment s;
    s.role = r;
    s.kind = SegmentKind::Vertical;
    s.sigma_a = s.sigma_b = sg;
    s.t_a = a;
    s.t_b = b;
    return s;
  };
  auto horiz = [](SegmentRole r, double a, double b, const Real& t) {
    ContourSegment s;
    s.role = r;
    s.kind = SegmentKind::Horizontal;
    s.sigma_a = a;
    s.sigma_b = b;
    s.t_a = t;
    s.t_b = t;
    return s;
  };
  std::vector<ContourSegment> segs;
  {
    ContourSegment hl;
    hl.role = SegmentRole::HLMinus;
    hl.kind = SegmentKind::HLArc;
    hl.t_a = Real(0);
    hl.t_b = g.T3m;
    segs.push_back(hl);
  }
  segs.push_back(horiz(SegmentRole::Delta4Minus, perron_detail::hl_sigma(to_double(g.T3m)), g.sigma_prime, g.T3m));
  segs.push_back(vert(SegmentRole::Delta3Minus, g.sigma_prime, g.T3m, g.T2m));
  segs.push_back(horiz(SegmentRole::Delta2Minus, g.sigma_prime, g.sigma0, g.T2m));
  segs.push_back(vert(SegmentRole::Delta1Minus, g.sigma0, g.T2m, g.T1m));
  segs.push_back(horiz(SegmentRole::Delta0Minus, g.sigma0, g.paths.front().sigma_minus, g.T1m));
  for (int m = g.m_lo; m <= g.m_hi; ++m) {
    const DescentPath& p = g.paths[static_cast<size_t>(m - g.m_lo)];
    ContourSegment d;
    d.role = SegmentRole::Descent;
    d.kind = SegmentKind::Descent;
    d.m = m;
    d.sigma_a = p.sigma_minus;
    d.sigma_b = p.sigma_plus;
    d.t_a = g.tau + Real(P.t_minus(m));
    d.t_b = g.tau + Real(P.t_plus(m));
    segs.push_back(d);
    if (m < g.m_hi) {
      const DescentPath& q = g.paths[static_cast<size_t>(m + 1 - g.m_lo)];
      Real tn = g.tau + Real(P.t_minus(m + 1));
      auto v = vert(SegmentRole::UpsilonV, p.sigma_plus, d.t_b, tn);
      v.m = m;
      auto h = horiz(SegmentRole::UpsilonH, p.sigma_plus, q.sigma_minus, tn);
      h.m = m;
      segs.push_back(v);
      segs.push_back(h);
    }
  }
  segs.push_back(horiz(SegmentRole::Delta0Plus, g.paths.back().sigma_plus, g.sigma0, g.T1p));
  segs.push_back(vert(SegmentRole::Delta1Plus, g.sigma0, g.T1p, g.T2p));
  segs.push_back(horiz(SegmentRole::Delta2Plus, g.sigma0, g.sigma_prime, g.T2p));
  segs.push_back(vert(SegmentRole::Delta3Plus, g.sigma_prime, g.T2p, g.T3p));
  segs.push_back(horiz(SegmentRole::Delta4Plus, g.sigma_prime, perron_detail::hl_sigma(to_double(g.T3p)), g.T3p));
  {
    ContourSegment hl;
    hl.role = SegmentRole::HLPlus;
    hl.kind = SegmentKind::HLArc;
    hl.t_a = g.T3p;
    hl.to_infinity = true;
    segs.push_back(hl);
  }

  if (co.t_top) {
    const Real& top = *co.t_top;
    if (top < g.T1p) fail(ErrorKind::InvalidArgument, "t_top must lie above T_1^+");
    g.t_top = top;
    std::vector<ContourSegment> clipped;
    for (auto s : segs) {
      if (s.kind == SegmentKind::Horizontal) {
        if (s.t_a >= top) break;
        clipped.push_back(s);
        continue;
      }
      if (s.t_a >= top) break;
      if (s.to_infinity || s.t_b > top) {
        s.t_b = top;
        s.to_infinity = false;
        clipped.push_back(s);
        break;
      }
      clipped.push_back(s);
    }
    double sg = clipped.back().end_sigma();
    clipped.push_back(horiz(SegmentRole::Closing, sg, co.kappa, top));
    segs = std::move(clipped);
  }
  g.segments = std::move(segs);

  // Closure: each end meets the next start.
  g.closes = true;
  for (size_t i = 0; i + 1 < g.segments.size(); ++i) {
    const auto& a = g.segments[i];
    const auto& b = g.segments[i + 1];
    if (a.to_infinity) {
      g.closes = false;
      break;
    }
    double ds = std::fabs(a.end_sigma() - b.start_sigma());
    double dt = to_double(hpm::abs(a.end_t() - b.start_t()));
    g.max_gap = std::max({g.max_gap, ds, dt});
  }
  if (g.max_gap > 1e-9) g.closes = false;
  return g;
}

struct SegmentReport {
  std::string tag;
  SegmentRole role = SegmentRole::VerticalLine;
  SegmentValue v;
  double envelope_log = NAN;     // natural log of the analytic envelope, when one is stated
  double envelope_constant = NAN;  // measured / envelope
  bool envelope_applicable = true;  // the bound's own precondition holds at this x
  bool below_saddle = false;
};

struct CompositeResult {
  CompositeGeometry geo;
  std::vector<SegmentReport> segments;
  double log_x = 0;
  double rho = 0;
  double saddle_log_abs = 0;  // |∫_{Γ_0}|, natural log
  bool complete = false;      // every segment formed as a value (clipped contour)
  double residue_term = 0;    // ρx²/2
  double contour_value = 0;   // (1/π) Im Σ segments
  double total = 0;
  double quad_error = 0;
  bool delta0_negative = true;  // Re ½τ^{1−(1+δ)s}/(s−iτ) < 0 sampled on Δ_0^±
  std::vector<std::string> dominating;  // non-saddle tags whose |∫| exceeds the saddle term
};

inline double segment_envelope_log(SegmentRole r, double lx, double sigma0, double c2, double a) {
  double llx = std::log(lx), S = std::sqrt(lx * llx), E6 = std::pow(lx / llx, 1.0 / 6);
  const double r2 = std::sqrt(2.0);
  switch (r) {
    case SegmentRole::Delta0Minus:
    case SegmentRole::Delta0Plus:
    case SegmentRole::Delta2Minus:
    case SegmentRole::Delta2Plus:
      return (1 + sigma0) * lx - r2 * S;
    case SegmentRole::Delta1Minus:
    case SegmentRole::Delta1Plus:
      return c2 / 2 * E6 + (1 + sigma0) * lx - r2 * S + r2 * std::sqrt(lx / llx) - c2 * E6;
    case SegmentRole::Delta3Minus:
    case SegmentRole::Delta3Plus:
      return 2 * lx - r2 / 2 * c2 * std::pow(lx / llx, 2.0 / 3);
    case SegmentRole::Delta4Minus:
      return 2 * lx - 2.25 * r2 * S;
    case SegmentRole::Delta4Plus:
    case SegmentRole::HLPlus:
      return 2 * lx - 2.5 * r2 * S;
    case SegmentRole::HLMinus:
      return log_add_exp(2 * lx - 2.25 * r2 * S, (2 - 1 / std::numbers::e) * lx);
    case SegmentRole::UpsilonV:
    case SegmentRole::UpsilonH:
      return 2 * lx - 2 * r2 * S - r2 * (a + std::log(2.0) + std::log(std::numbers::pi / 2)) * std::sqrt(lx / llx);
    default:
      return NAN;
  }
}

// The composite contour for term k at x = x_k.
inline CompositeResult perron_composite(const SaddleProblem& P, const CompositeOptions& co = {}) {
  CompositeResult R;
  R.geo = build_composite_geometry(P, co);
  const auto& sys = P.system();
  const SystemTerm& term = sys.term(P.k());
  R.log_x = P.log_x();
  ZetaEvaluator z(sys);
  PerronIntegrand I(z, R.log_x, PerronIntegrand::Kind::Full);
  R.rho = residue_at_1(z).rho;
  R.complete = true;
  SplitComplex sum;
  double err_log = -INFINITY;

  // Saddle reference: |∫_{Γ_0}|.
  std::vector<SaddleContribution> contribs;
  for (size_t i = 0; i < R.geo.saddles.size(); ++i) {
    int m = R.geo.m_lo + static_cast<int>(i);
    contribs.push_back(P.contribution(m, R.geo.saddles[i], R.geo.paths[i]));
  }
  R.saddle_log_abs = contribs[static_cast<size_t>(-R.geo.m_lo)].log_R;

  for (const auto& seg : R.geo.segments) {
    SegmentReport rep;
    rep.tag = seg.tag();
    rep.role = seg.role;
    if (seg.kind == SegmentKind::Descent) {
      const auto& c = contribs[static_cast<size_t>(seg.m - R.geo.m_lo)];
      rep.v.value = c.value;
      rep.v.log_abs = c.log_R;
      const auto& sp = R.geo.saddles[static_cast<size_t>(seg.m - R.geo.m_lo)];
      if (c.quad_error > 0) rep.v.log_error = std::log(c.quad_error) + sp.h_val.real();
    } else {
      rep.v = integrate_segment(I, seg, co.perron);
      rep.envelope_log = segment_envelope_log(seg.role, R.log_x, R.geo.sigma0, R.geo.cdp.value, term.a_d);
      if (std::isfinite(rep.envelope_log)) rep.envelope_constant = std::exp(rep.v.log_abs - rep.envelope_log);
      if (seg.role == SegmentRole::Delta4Minus) {
        // Needs the arc abscissa at T_3^− left of 1 − (9/4)√2 √(llx/lx).
        double lx = R.log_x;
        rep.envelope_applicable = seg.sigma_a <= 1 - 2.25 * std::sqrt(2.0) * std::sqrt(std::log(lx) / lx);
      }
      rep.below_saddle = rep.v.log_abs < R.saddle_log_abs;
      if (!rep.below_saddle && seg.role != SegmentRole::Closing) R.dominating.push_back(rep.tag);
    }
    if (rep.v.abs_only) R.complete = false;
    else sum = sum + rep.v.value;
    err_log = log_add_exp(err_log, rep.v.log_error);
    R.segments.push_back(rep);
  }

  // Δ_0^±: the k-th upper term has negative real part.
  for (const auto& seg : R.geo.segments) {
    if (seg.role != SegmentRole::Delta0Minus && seg.role != SegmentRole::Delta0Plus) continue;
    double off;
    {
      PrecisionGuard pg(std::max(P.bits(), bits_of(term.tau)));
      off = to_double(seg.t_a - term.tau);
    }
    for (int i = 0; i <= 200; ++i) {
      double sg = seg.sigma_a + (seg.sigma_b - seg.sigma_a) * i / 200;
      if (!(P.q(cplx(sg, off)).real() < 0)) R.delta0_negative = false;
    }
  }

  R.residue_term = R.rho * std::exp(2 * R.log_x) / 2;
  R.quad_error = std::exp(err_log) / std::numbers::pi;
  if (R.complete) {
    R.contour_value = sum.is_zero() ? 0.0 : sum.to_cplx().imag() / std::numbers::pi;
    R.total = R.residue_term + R.contour_value;
  }
  if (co.throw_on_dominates && !R.dominating.empty())
    fail(ErrorKind::SegmentDominates, "segment " + R.dominating.front() + " exceeds the saddle term");
  return R;
}

// Ledger rows: {tag, log10_abs, phase, bound_log10_abs}.
inline nlohmann::json composite_ledger_json(const CompositeResult& R) {
  nlohmann::json j;
  j["log_x"] = R.log_x;
  j["rho"] = R.rho;
  j["saddle_log10_abs"] = R.saddle_log_abs / std::numbers::ln10;
  j["sigma0"] = R.geo.sigma0;
  j["sigma_prime"] = R.geo.sigma_prime;
  j["c_doubleprime"] = R.geo.cdp.value;
  j["complete"] = R.complete;
  if (R.complete) j["total"] = R.total;
  j["delta0_negative"] = R.delta0_negative;
  auto& segs = j["segments"] = nlohmann::json::array();
  for (const auto& s : R.segments) {
    nlohmann::json row;
    row["tag"] = s.tag;
    row["log10_abs"] = s.v.log_abs / std::numbers::ln10;
    if (s.v.abs_only) row["phase"] = nullptr;
    else row["phase"] = s.v.value.phase();
    row["abs_only"] = s.v.abs_only;
    row["bound_applicable"] = s.envelope_applicable;
    if (std::isfinite(s.envelope_log)) row["bound_log10_abs"] = s.envelope_log / std::numbers::ln10;
    else row["bound_log10_abs"] = nullptr;
    segs.push_back(row);
  }
  return j;
}

}  // namespace beurling
