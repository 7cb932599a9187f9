#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/hp_complex.hpp"

namespace beurling {

struct QuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 30;
  int initial_panels = 1;
  long max_intervals = 2'000'000;
};

struct QuadResult {
  cplx value{0, 0};
  double error = 0;
  bool converged = true;
  long evaluations = 0;
};

namespace gk15 {
inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.0};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace gk15

// One 15-point Kronrod panel; error is |K15 − G7|.
template <class F>
inline std::pair<cplx, double> gk15_panel(F& f, double a, double b) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  cplx fc = f(c);
  cplx rk = fc * gk15::wgk[7];
  cplx rg = fc * gk15::wg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = h * gk15::xgk[j];
    cplx s = f(c - dx) + f(c + dx);
    rk += gk15::wgk[j] * s;
    if (j % 2 == 1) rg += gk15::wg[j / 2] * s;
  }
  return {rk * h, std::abs((rk - rg) * h)};
}

// Globally adaptive GK15 on [a, b]; refines the worst panel until
// err ≤ max(abs_tol, rel_tol·|value|) or every open panel hit max_depth.
template <class F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadOptions& opt = {}) {
  struct Panel {
    double a, b;
    cplx v;
    double e;
    int depth;
    bool operator<(const Panel& o) const { return e < o.e; }
  };
  QuadResult out;
  if (a == b) return out;
  std::priority_queue<Panel> heap;
  std::vector<Panel> frozen;
  int n0 = std::max(1, opt.initial_panels);
  cplx total{0, 0};
  double err = 0;
  for (int i = 0; i < n0; ++i) {
    double pa = a + (b - a) * i / n0, pb = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
    auto [v, e] = gk15_panel(f, pa, pb);
    out.evaluations += 15;
    heap.push({pa, pb, v, e, 0});
    total += v;
    err += e;
  }
  long intervals = n0;
  while (!heap.empty()) {
    double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (err <= target) break;
    Panel p = heap.top();
    heap.pop();
    if (p.depth >= opt.max_depth || intervals >= opt.max_intervals) {
      frozen.push_back(p);
      continue;
    }
    double m = 0.5 * (p.a + p.b);
    auto [v1, e1] = gk15_panel(f, p.a, m);
    auto [v2, e2] = gk15_panel(f, m, p.b);
    out.evaluations += 30;
    ++intervals;
    total += v1 + v2 - p.v;
    err += e1 + e2 - p.e;
    heap.push({p.a, m, v1, e1, p.depth + 1});
    heap.push({m, p.b, v2, e2, p.depth + 1});
  }
  // Re-sum to limit drift from incremental updates.
  cplx sum{0, 0};
  double esum = 0;
  while (!heap.empty()) {
    sum += heap.top().v;
    esum += heap.top().e;
    heap.pop();
  }
  for (auto& p : frozen) {
    sum += p.v;
    esum += p.e;
  }
  out.value = sum;
  out.error = esum;
  out.converged = esum <= std::max(opt.abs_tol, opt.rel_tol * std::abs(sum)) * 1.0000001;
  if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag())) fail(ErrorKind::NonFinite, "integrand produced non-finite value");
  return out;
}

enum class SegmentKind { Vertical, Horizontal, HLArc, Descent, Connector, Delta, Line, Arc, Generic };

inline const char* to_string(SegmentKind k) {
  switch (k) {
    case SegmentKind::Vertical: return "vertical";
    case SegmentKind::Horizontal: return "horizontal";
    case SegmentKind::HLArc: return "HL-arc";
    case SegmentKind::Descent: return "descent";
    case SegmentKind::Connector: return "connector";
    case SegmentKind::Delta: return "delta";
    case SegmentKind::Line: return "line";
    case SegmentKind::Arc: return "arc";
    case SegmentKind::Generic: return "generic";
  }
  return "generic";
}

// Parametrized piece u ∈ [u0, u1] ↦ point(u), with derivative.
struct PathSegment {
  std::string tag;
  SegmentKind kind = SegmentKind::Generic;
  double u0 = 0, u1 = 1;
  std::function<cplx(double)> point;
  std::function<cplx(double)> deriv;
  int initial_panels = 1;

  cplx start() const { return point(u0); }
  cplx end() const { return point(u1); }
};

struct ContourPath {
  std::vector<PathSegment> segments;

  void push(PathSegment s) { segments.push_back(std::move(s)); }
  void append(const ContourPath& o) { segments.insert(segments.end(), o.segments.begin(), o.segments.end()); }

  // Largest gap between consecutive segment endpoints.
  double max_joint_gap() const {
    double g = 0;
    for (size_t i = 1; i < segments.size(); ++i) g = std::max(g, std::abs(segments[i].start() - segments[i - 1].end()));
    return g;
  }

  ContourPath reversed() const {
    ContourPath r;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
      PathSegment s = *it;
      double u0 = it->u0, u1 = it->u1;
      auto p = it->point;
      auto d = it->deriv;
      s.point = [p, u0, u1](double u) { return p(u0 + u1 - u); };
      s.deriv = [d, u0, u1](double u) { return -d(u0 + u1 - u); };
      r.push(std::move(s));
    }
    return r;
  }
};

inline PathSegment line_segment(cplx a, cplx b, std::string tag = "line", SegmentKind kind = SegmentKind::Line) {
  PathSegment s;
  s.tag = std::move(tag);
  s.kind = kind;
  s.u0 = 0;
  s.u1 = 1;
  s.point = [a, b](double u) { return a + (b - a) * u; };
  s.deriv = [a, b](double) { return b - a; };
  return s;
}

inline PathSegment circle_segment(cplx c, double r, double phi0, double phi1, std::string tag = "arc") {
  PathSegment s;
  s.tag = std::move(tag);
  s.kind = SegmentKind::Arc;
  s.u0 = phi0;
  s.u1 = phi1;
  s.point = [c, r](double u) { return c + std::polar(r, u); };
  s.deriv = [r](double u) { return cplx(0, 1) * std::polar(r, u); };
  return s;
}

struct PathIntegral {
  cplx value{0, 0};
  double error = 0;
  bool converged = true;
  std::vector<QuadResult> per_segment;
};

template <class G>
PathIntegral integrate_path_ex(G&& g, const ContourPath& path, double tol, QuadOptions opt = {}) {
  opt.abs_tol = tol;
  opt.rel_tol = tol;
  PathIntegral out;
  for (const auto& seg : path.segments) {
    QuadOptions o = opt;
    o.initial_panels = std::max(opt.initial_panels, seg.initial_panels);
    auto h = [&](double u) { return g(seg.point(u)) * seg.deriv(u); };
    QuadResult r = integrate_gk(h, seg.u0, seg.u1, o);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
    out.per_segment.push_back(r);
  }
  return out;
}

// Throws ToleranceNotMet when the error target is missed.
template <class G>
cplx integrate_path(G&& g, const ContourPath& path, double tol) {
  PathIntegral r = integrate_path_ex(std::forward<G>(g), path, tol);
  if (r.error > tol * (1 + std::abs(r.value)))
    fail(ErrorKind::ToleranceNotMet, "best value (" + std::to_string(r.value.real()) + "," +
                                         std::to_string(r.value.imag()) + ") error " + std::to_string(r.error));
  return r.value;
}

}  // namespace beurling
