#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/quadrature.hpp"
#include "beurling/numeric/special.hpp"

namespace beurling {

// Segments live in log coordinates v = log u; a density g(v) means dμ = g(v) dv.
enum class DensityKind { RationalLog, SineChunkDerivative, GridCells, UserTable, Analytic };

inline const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::RationalLog: return "RationalLog";
    case DensityKind::SineChunkDerivative: return "SineChunkDerivative";
    case DensityKind::GridCells: return "GridCells";
    case DensityKind::UserTable: return "UserTable";
    case DensityKind::Analytic: return "Analytic";
  }
  return "?";
}

// τ cos(τ v) dv, i.e. d sin(τ log u). Phases beyond double range go through mpfr.
struct SineChunk {
  double tau = 0;
  std::shared_ptr<Real> tau_hp;  // exact τ when available
  unsigned bits = 256;
  bool with_base = true;  // chunk segments also carry the (1−1/u)/log u base density

  bool needs_hp(double v) const { return tau_hp && std::fabs(tau * v) > 1e8; }

  // (sin(τ v), cos(τ v)) with the phase reduced at full precision when needed.
  std::pair<double, double> sincos(double v) const {
    if (!needs_hp(v)) return {std::sin(tau * v), std::cos(tau * v)};
    PrecisionGuard g(std::max(bits, static_cast<unsigned>(std::log2(std::fabs(tau * v) + 1) + 96)));
    Real ph = *tau_hp * Real(v);
    double r = reduce_mod_2pi(ph).r;
    return {std::sin(r), std::cos(r)};
  }
};

struct TableDensity {
  std::vector<double> v;  // increasing
  std::vector<double> g;  // density per dv at v
  std::vector<double> cum;

  void finalize() {
    cum.assign(v.size(), 0);
    for (size_t i = 1; i < v.size(); ++i) cum[i] = cum[i - 1] + 0.5 * (g[i] + g[i - 1]) * (v[i] - v[i - 1]);
  }
  double at(double x) const {
    if (x <= v.front()) return g.front();
    if (x >= v.back()) return g.back();
    size_t i = std::upper_bound(v.begin(), v.end(), x) - v.begin() - 1;
    double w = (x - v[i]) / (v[i + 1] - v[i]);
    return g[i] * (1 - w) + g[i + 1] * w;
  }
  double integral_to(double x) const {
    if (x <= v.front()) return 0;
    if (x >= v.back()) return cum.back();
    size_t i = std::upper_bound(v.begin(), v.end(), x) - v.begin() - 1;
    double gx = at(x);
    return cum[i] + 0.5 * (g[i] + gx) * (x - v[i]);
  }
};

struct CellDensity {
  double h = 1e-4;
  std::vector<double> mass;  // mass of cell [jh, (j+1)h)
};

struct AnalyticDensity {
  std::function<double(double)> g;              // density per dv
  std::function<double(double)> antiderivative;  // optional G with G′ = g
  std::string name;
};

struct Segment {
  double la = 0, lb = 0;  // log bounds, la < lb (lb may be +inf)
  DensityKind kind = DensityKind::RationalLog;
  SineChunk chunk;
  std::shared_ptr<TableDensity> table;
  std::shared_ptr<CellDensity> cells;
  std::shared_ptr<AnalyticDensity> analytic;

  double density(double v) const {
    switch (kind) {
      case DensityKind::RationalLog: return p_density_log(v);
      case DensityKind::SineChunkDerivative:
        return chunk.tau * chunk.sincos(v).second + (chunk.with_base ? p_density_log(v) : 0.0);
      case DensityKind::UserTable: return table->at(v);
      case DensityKind::Analytic: return analytic->g(v);
      case DensityKind::GridCells: {
        long j = static_cast<long>(std::floor(v / cells->h));
        if (j < 0 || j >= static_cast<long>(cells->mass.size())) return 0;
        return cells->mass[j] / cells->h;
      }
    }
    return 0;
  }

  // ∫_{la}^{min(v, lb)} density.
  double mass_to(double v) const {
    if (v <= la) return 0;
    double b = std::min(v, lb);
    switch (kind) {
      case DensityKind::RationalLog: return p_of_log(b) - p_of_log(la);
      case DensityKind::SineChunkDerivative:
        return chunk.sincos(b).first - chunk.sincos(la).first +
               (chunk.with_base ? p_of_log(b) - p_of_log(la) : 0.0);
      case DensityKind::UserTable: return table->integral_to(b) - table->integral_to(la);
      case DensityKind::Analytic:
        if (analytic->antiderivative) return analytic->antiderivative(b) - analytic->antiderivative(la);
        return quad_mass(la, b);
      case DensityKind::GridCells: {
        double s = 0;
        for (size_t j = 0; j < cells->mass.size(); ++j) {
          double c0 = j * cells->h, c1 = c0 + cells->h;
          double lo = std::max(c0, la), hi = std::min(c1, b);
          if (hi > lo) s += cells->mass[j] * (hi - lo) / cells->h;
        }
        return s;
      }
    }
    return 0;
  }

  double quad_mass(double a, double b) const {
    QuadOptions o;
    o.abs_tol = 1e-15;
    o.rel_tol = 1e-13;
    o.initial_panels = 4;
    return integrate_gk([this](double v) { return cplx(density(v)); }, a, b, o).value.real();
  }
};

struct MellinValue {
  cplx value{0, 0};
  double tail_bound = 0;  // closed forms to infinity are exact, so this stays 0 unless a caller truncates
};

// Non-negative (or flagged signed) measure on [1, ∞): atoms plus density segments.
class Measure {
 public:
  std::map<double, double> atoms;  // position u ≥ 1 → weight
  std::vector<Segment> segments;   // sorted, non-overlapping
  bool is_signed = false;

  static Measure zero() { return {}; }

  static Measure dP() {
    Measure m;
    Segment s;
    s.la = 0;
    s.lb = std::numeric_limits<double>::infinity();
    s.kind = DensityKind::RationalLog;
    m.segments.push_back(s);
    return m;
  }

  static Measure atomic(const std::map<double, double>& a) {
    Measure m;
    m.atoms = a;
    for (auto& [u, w] : a) {
      if (u < 1) fail(ErrorKind::InvalidArgument, "atom below 1");
      if (w < 0) m.is_signed = true;
    }
    return m;
  }

  void add_segment(Segment s) {
    if (!(s.la < s.lb) || s.la < 0) fail(ErrorKind::InvalidArgument, "segment bounds");
    for (auto& o : segments)
      if (s.la < o.lb && o.la < s.lb) fail(ErrorKind::InvalidArgument, "overlapping segments");
    segments.push_back(std::move(s));
    std::sort(segments.begin(), segments.end(), [](auto& a, auto& b) { return a.la < b.la; });
  }

  double density_log(double v) const {
    double g = 0;
    for (auto& s : segments)
      if (v >= s.la && v < s.lb) g += s.density(v);
    return g;
  }

  double continuous_cdf_log(double v) const {
    double c = 0;
    for (auto& s : segments) {
      if (s.la >= v) break;
      c += s.mass_to(v);
    }
    return c;
  }

  // ∫_{1⁻}^{x} dμ.
  double cdf(double x) const {
    if (x < 1) return 0;
    double c = 0;
    for (auto& [u, w] : atoms) {
      if (u > x) break;
      c += w;
    }
    return c + continuous_cdf_log(std::log(x));
  }

  // ∫_1^{x_cut} u^{−s} dμ(u); x_cut = +inf allowed for Re s > 1 when the segments are closed-form.
  MellinValue mellin_stieltjes(cplx s, double x_cut = std::numeric_limits<double>::infinity()) const {
    MellinValue out;
    double vcut = std::isinf(x_cut) ? x_cut : std::log(x_cut);
    for (auto& [u, w] : atoms) {
      if (u > x_cut) break;
      out.value += w * std::exp(-s * std::log(u));
    }
    for (auto& seg : segments) {
      double a = seg.la, b = std::min(seg.lb, vcut);
      if (!(b > a)) continue;
      if (std::isinf(b) && s.real() <= 1) fail(ErrorKind::DivergentTail, "Re s ≤ 1 with infinite support");
      out.value += segment_mellin(seg, s, a, b);
    }
    return out;
  }

  // Pointwise density check at n samples per finite segment (signed measures skip it).
  bool check_nonnegative(int samples_per_segment = 10000) const {
    if (is_signed) return true;
    for (auto& [u, w] : atoms)
      if (w < 0) return false;
    for (auto& s : segments) {
      double b = std::isinf(s.lb) ? s.la + 50 : s.lb;
      for (int i = 0; i < samples_per_segment; ++i) {
        double v = s.la + (b - s.la) * (i + 0.5) / samples_per_segment;
        if (s.density(v) < 0) return false;
      }
    }
    return true;
  }

 private:
  static cplx rational_log_mellin(cplx s, double a, double b) {
    // ∫_a^b e^{−sv}(e^v − 1)/v dv = [Ein(sv) − Ein((s−1)v)]_a^b.
    auto F = [&](double v) -> cplx {
      if (v == 0) return 0;
      return ein(s * v) - ein((s - 1.0) * v);
    };
    if (std::isinf(b)) return std::log(s) - std::log(s - 1.0) - F(a);
    return F(b) - F(a);
  }

  static cplx segment_mellin(const Segment& seg, cplx s, double a, double b) {
    switch (seg.kind) {
      case DensityKind::RationalLog: return rational_log_mellin(s, a, b);
      case DensityKind::SineChunkDerivative: {
        // (τ/2) Σ_ε [e^{(iετ−s)v}/(iετ − s)]_a^b.
        const double tau = seg.chunk.tau;
        auto [sa, ca] = seg.chunk.sincos(a);
        auto [sb, cb] = seg.chunk.sincos(b);
        cplx ea(ca, sa), eb(cb, sb);
        cplx r = 0;
        for (int eps : {1, -1}) {
          cplx pa = eps == 1 ? ea : std::conj(ea), pb = eps == 1 ? eb : std::conj(eb);
          cplx den = cplx(0, eps * tau) - s;
          cplx vb = std::exp(-s * b + std::log(tau / 2)) * pb / den;
          cplx va = std::exp(-s * a + std::log(tau / 2)) * pa / den;
          r += vb - va;
        }
        if (seg.chunk.with_base) r += rational_log_mellin(s, a, b);
        return r;
      }
      case DensityKind::GridCells: {
        cplx r = 0;
        const auto& c = *seg.cells;
        for (size_t j = 0; j < c.mass.size(); ++j) {
          double c0 = j * c.h;
          if (c0 >= b) break;
          cplx sh = s * c.h;
          cplx avg = std::abs(sh) < 1e-8 ? cplx(1) - sh / 2.0 : -cexpm1(-sh) / sh;
          r += c.mass[j] * std::exp(-s * c0) * avg;
        }
        return r;
      }
      case DensityKind::UserTable:
      case DensityKind::Analytic: {
        if (std::isinf(b)) fail(ErrorKind::DivergentTail, "quadrature segment needs finite cut");
        QuadOptions o;
        o.abs_tol = 1e-14;
        o.rel_tol = 1e-12;
        o.initial_panels = 8 + static_cast<int>((b - a) * (1 + std::fabs(s.imag())));
        return integrate_gk([&](double v) { return seg.density(v) * std::exp(-s * v); }, a, b, o).value;
      }
    }
    return 0;
  }
};

// Atoms for p^k (k ≥ 1) with weight m/k, i.e. Π of a discrete prime list.
inline Measure atomic_prime_measure(const std::vector<std::pair<double, int>>& primes, double x_max) {
  std::map<double, double> a;
  for (auto [p, m] : primes) {
    if (p <= 1) fail(ErrorKind::InvalidArgument, "prime ≤ 1");
    double q = p;
    for (int k = 1; q <= x_max * (1 + 1e-15); ++k, q *= p) a[q] += static_cast<double>(m) / k;
  }
  return Measure::atomic(a);
}

}  // namespace beurling
