#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "beurling/measure/measure.hpp"
#include "beurling/numeric/errors.hpp"
#include "beurling/numeric/mod2pi.hpp"
#include "beurling/numeric/precision.hpp"
#include "beurling/numeric/roots.hpp"
#include "beurling/perron/perron.hpp"
#include "beurling/saddle/saddle.hpp"
#include "beurling/system/system.hpp"

namespace beurling {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [0, 1) keyed by (seed, stream, index); independent of evaluation order.
inline double keyed_uniform(uint64_t seed, uint64_t stream, uint64_t index) {
  uint64_t h = splitmix64(splitmix64(seed ^ (stream * 0xd1b54a32d192ed03ULL)) + index);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct SamplingGridOptions {
  long J_exact = 1L << 20;    // Bernoulli cells j0..J_exact drawn one by one
  double y_max = 1e6;
  double bin_mass = 4;        // Π_C-mass per Poisson bin beyond u_{J_exact}
  double table_step = 2e-5;   // log-u step of the inverse-Π_C table
};

// Grid u_j = (log j)^{1/4}, j ≥ j0, with cells below j0 merged into [1, u_{j0}].
struct SamplingGrid {
  long j0 = 0;
  long J_exact = 0;
  double y_max = 0;
  std::vector<double> u;  // u_j, index j − j0
  std::vector<double> q;  // q_j
  double sup_q = 0;
  double tail_q_bound = 0;  // sup of q_j for j > J_exact, from dΠ_C ≤ 2du/log 2u
  // Beyond u_{J_exact}: table (log u, Π_C(u) − Π_C(u_J)) and Poisson bins in table indices.
  std::vector<double> tab_v, tab_c;
  std::vector<size_t> bin_start;  // bin b covers table rows [bin_start[b], bin_start[b+1]]
  std::vector<double> bin_mu;
  Measure pi;

  static double u_of(long j) { return std::pow(std::log(static_cast<double>(j)), 0.25); }
  double cdf(double x) const { return pi.cdf(x); }
  double u_last() const { return u.back(); }
};

inline SamplingGrid build_grid(const ContinuousPrimeSystem& sys, SamplingGridOptions opt = {}) {
  SamplingGrid g;
  g.pi = pi_c_measure(sys);
  g.y_max = opt.y_max;
  g.J_exact = opt.J_exact;
  long j = 2;
  while (SamplingGrid::u_of(j) <= 1) ++j;
  // q_j decreases along the grid, so the first admissible j has every later q_j ≤ 1/2.
  for (;; ++j) {
    double qj = g.pi.cdf(SamplingGrid::u_of(j)) - g.pi.cdf(1);
    double rest = g.pi.cdf(SamplingGrid::u_of(j + 1)) - g.pi.cdf(SamplingGrid::u_of(j));
    if (qj <= 0.5 && rest <= 0.5) break;
  }
  g.j0 = j;
  if (g.J_exact < g.j0) g.J_exact = g.j0;
  double prev_c = g.pi.cdf(1);
  for (long i = g.j0; i <= g.J_exact; ++i) {
    double ui = SamplingGrid::u_of(i), ci = g.pi.cdf(ui);
    g.u.push_back(ui);
    g.q.push_back(ci - prev_c);
    if (ci - prev_c < 0) fail(ErrorKind::ConditionViolated, "negative cell mass");
    g.sup_q = std::max(g.sup_q, ci - prev_c);
    prev_c = ci;
  }
  {
    double J = static_cast<double>(g.J_exact);
    double du = 0.25 * std::pow(std::log(J), -0.75) / J;
    g.tail_q_bound = 2 * du / std::log(2 * g.u_last());
  }
  if (g.sup_q > 0.5 || g.tail_q_bound > 0.5) fail(ErrorKind::ConditionViolated, "q_j > 1/2");

  double v0 = std::log(g.u_last()), v1 = std::log(g.y_max);
  if (v1 > v0) {
    size_t n = static_cast<size_t>(std::ceil((v1 - v0) / opt.table_step));
    double step = (v1 - v0) / static_cast<double>(n);
    g.tab_v.resize(n + 1);
    g.tab_c.resize(n + 1);
    for (size_t i = 0; i <= n; ++i) {
      g.tab_v[i] = v0 + step * static_cast<double>(i);
      g.tab_c[i] = g.pi.continuous_cdf_log(g.tab_v[i]) - g.pi.continuous_cdf_log(v0);
      if (i > 0 && g.tab_c[i] < g.tab_c[i - 1]) g.tab_c[i] = g.tab_c[i - 1];
    }
    g.bin_start.push_back(0);
    double next = opt.bin_mass;
    for (size_t i = 1; i <= n; ++i)
      if (g.tab_c[i] >= next || i == n) {
        g.bin_start.push_back(i);
        next = g.tab_c[i] + opt.bin_mass;
      }
    for (size_t b = 0; b + 1 < g.bin_start.size(); ++b) g.bin_mu.push_back(g.tab_c[g.bin_start[b + 1]] - g.tab_c[g.bin_start[b]]);
  }
  return g;
}

struct AugmentationRecord {
  Real p;
  int m_aug = 0;
};

struct RandomDiscreteSystem {
  uint64_t seed = 0;
  long j0 = 0;
  double y_max = 0;
  std::vector<long> exact_selected;  // grid indices j with X_j = 1
  std::vector<double> primes;        // sorted
  std::optional<AugmentationRecord> augmentation;

  // π(y), sampled primes only.
  double pi(double y) const {
    return static_cast<double>(std::upper_bound(primes.begin(), primes.end(), y) - primes.begin());
  }
};

inline RandomDiscreteSystem sample(const SamplingGrid& g, uint64_t seed, double y_max = 0) {
  RandomDiscreteSystem s;
  s.seed = seed;
  s.j0 = g.j0;
  s.y_max = y_max > 0 ? std::min(y_max, g.y_max) : g.y_max;
  for (size_t i = 0; i < g.u.size(); ++i) {
    if (g.u[i] > s.y_max) break;
    long j = g.j0 + static_cast<long>(i);
    if (keyed_uniform(seed, 1, static_cast<uint64_t>(j)) < g.q[i]) {
      s.exact_selected.push_back(j);
      s.primes.push_back(g.u[i]);
    }
  }
  // Beyond u_J the cells are far below double resolution: the count in a bin is a sum of Bernoulli(q_j)
  // with Σq_j = μ_b and Σq_j² ≤ (sup q)μ_b, drawn as Poisson(μ_b); positions follow Π_C inside the bin.
  const double vmax = std::log(s.y_max);
  for (size_t b = 0; b < g.bin_mu.size(); ++b) {
    size_t i0 = g.bin_start[b], i1 = g.bin_start[b + 1];
    if (g.tab_v[i0] >= vmax) break;
    std::mt19937_64 rng(splitmix64(seed ^ 0x5bd1e995ULL) + b);
    std::poisson_distribution<long> pd(g.bin_mu[b]);
    long n = pd(rng);
    std::uniform_real_distribution<double> ud(g.tab_c[i0], g.tab_c[i1]);
    for (long k = 0; k < n; ++k) {
      double c = ud(rng);
      auto it = std::upper_bound(g.tab_c.begin() + static_cast<long>(i0), g.tab_c.begin() + static_cast<long>(i1) + 1, c);
      size_t r = std::min<size_t>(std::max<size_t>(static_cast<size_t>(it - g.tab_c.begin()), i0 + 1), i1);
      double c0 = g.tab_c[r - 1], c1 = g.tab_c[r];
      double f = c1 > c0 ? (c - c0) / (c1 - c0) : 0.5;
      double v = g.tab_v[r - 1] + f * (g.tab_v[r] - g.tab_v[r - 1]);
      if (v <= vmax) s.primes.push_back(std::exp(v));
    }
  }
  std::sort(s.primes.begin(), s.primes.end());
  return s;
}

// S(y;t) = Σ_{p ≤ y} p^{−it}.
inline cplx exp_sum(const RandomDiscreteSystem& s, double y, double t) {
  cplx acc = 0;
  for (double p : s.primes) {
    if (p > y) break;
    acc += std::polar(1.0, -t * std::log(p));
  }
  return acc;
}

// S(y_i; t) for sorted ys in one pass.
inline std::vector<cplx> exp_sum_many(const RandomDiscreteSystem& s, const std::vector<double>& ys, double t) {
  std::vector<cplx> out(ys.size());
  cplx acc = 0;
  size_t i = 0;
  for (size_t k = 0; k < ys.size(); ++k) {
    while (i < s.primes.size() && s.primes[i] <= ys[k]) acc += std::polar(1.0, -t * std::log(s.primes[i++]));
    out[k] = acc;
  }
  return out;
}

// S_C(y;t) = ∫_1^y u^{−it} dΠ_C(u).
inline cplx exp_sum_continuous(const Measure& pi, double y, double t) {
  if (y <= 1) return 0;
  return pi.mellin_stieltjes(cplx(0, t), y).value;
}

// Right side of S(y;t1) = y^{i(t2−t1)} S(y;t2) − i(t2−t1) ∫_1^y S(u;t2) u^{i(t2−t1)−1} du, with the integral taken
// exactly between consecutive primes where S(·;t2) is constant.
inline cplx transfer_exp_sum(const RandomDiscreteSystem& s, double y, double t1, double t2) {
  const double d = t2 - t1;
  if (d == 0) return exp_sum(s, y, t1);
  auto upow = [&](double u) { return std::polar(1.0, d * std::log(u)); };
  cplx S2 = 0, integral = 0;
  for (size_t i = 0; i < s.primes.size() && s.primes[i] <= y; ++i) {
    S2 += std::polar(1.0, -t2 * std::log(s.primes[i]));
    double b = (i + 1 < s.primes.size() && s.primes[i + 1] <= y) ? s.primes[i + 1] : y;
    integral += S2 * (upow(b) - upow(s.primes[i])) / cplx(0, d);
  }
  return upow(y) * S2 - cplx(0, d) * integral;
}

// exp(−v²/(4Σq_j(1−q_j))), valid for 0 ≤ v ≤ 2Σq_j(1−q_j).
inline double kolmogorov_bound(const std::vector<double>& q, double v) {
  double var = 0;
  for (double x : q) var += x * (1 - x);
  if (v < 0 || v > 2 * var) fail(ErrorKind::ConditionViolated, "v outside [0, 2Σq(1−q)]");
  if (v == 0) return 1;
  return std::exp(-v * v / (4 * var));
}

struct VarianceSandwich {
  double sum_var = 0;  // Σ_{j ≤ J} q_j(1−q_j)
  double pi_c = 0;     // Π_C(u_J) − Π_C(1)
  bool holds = false;
};

inline VarianceSandwich variance_sandwich(const SamplingGrid& g, size_t J_index) {
  VarianceSandwich r;
  J_index = std::min(J_index, g.q.size() - 1);
  for (size_t i = 0; i <= J_index; ++i) r.sum_var += g.q[i] * (1 - g.q[i]);
  r.pi_c = g.cdf(g.u[J_index]) - g.cdf(1);
  r.holds = 0.5 * r.pi_c <= r.sum_var && r.sum_var <= r.pi_c;
  return r;
}

// ---- Deviation checks (A)–(C) ----

struct BoundsOptions {
  double yA_lo = 1e2, yA_hi = 1e6;
  std::vector<double> yB{1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5};
  std::vector<double> tB{10, 30, 100, 300, 1000, 3000};
  long m_lo = 100, m_hi = 10000;  // integer y lattice for (C)
  double threshold_const = 4;     // |S − S_C| ≥ 4√m (log τ_k)^{1/4}
  int k = 0;
};

// Precomputed continuous side for (C): window, lattice and S_C on it.
struct CWindow {
  int k = 0;
  double log_tau = 0;
  double half_width = 0;  // exp((c″/2)(log x/log log x)^{1/6})
  std::vector<long> n;    // integers with |n − τ_k| ≤ half_width
  std::vector<double> m;  // y lattice
  std::vector<std::vector<cplx>> S_C;  // [n][m]
};

inline CWindow make_c_window(const SamplingGrid& g, const ContinuousPrimeSystem& sys, double c_doubleprime,
                             const BoundsOptions& o) {
  CWindow w;
  w.k = o.k;
  const SystemTerm& t = sys.term(o.k);
  w.log_tau = t.log_tau_d;
  double lx = t.log_x_d;
  w.half_width = std::exp(c_doubleprime / 2 * std::pow(lx / std::log(lx), 1.0 / 6));
  for (long n = static_cast<long>(std::ceil(t.tau_d - w.half_width)); n <= static_cast<long>(std::floor(t.tau_d + w.half_width)); ++n)
    w.n.push_back(n);
  for (long m = o.m_lo; m <= o.m_hi; ++m) w.m.push_back(static_cast<double>(m));
  for (long n : w.n) {
    std::vector<cplx> row;
    row.reserve(w.m.size());
    for (double m : w.m) row.push_back(exp_sum_continuous(g.pi, m, static_cast<double>(n)));
    w.S_C.push_back(std::move(row));
  }
  return w;
}

struct DeviationReport {
  double A_const = 0;  // max |π(y) − Π_C(y)|/√y on [yA_lo, yA_hi]
  double B_const = 0;  // max |S − S_C|/√(y log t) on the (B) lattice
  double C_const = 0;  // max |S − S_C|/(√y (log τ_k)^{1/4}) on the (C) lattice
  long C_cells = 0;
  long C_exceed = 0;   // cells at or above the threshold line
  std::vector<char> C_exceed_mask;  // per (n, m) cell, row-major
};

inline DeviationReport check_bounds(const SamplingGrid& g, const RandomDiscreteSystem& s, const CWindow& w,
                                    const BoundsOptions& o) {
  DeviationReport r;
  // (A) at every jump, both sides, plus the ends.
  auto checkA = [&](double y, double count) {
    if (y < o.yA_lo || y > o.yA_hi) return;
    r.A_const = std::max(r.A_const, std::fabs(count - (g.cdf(y) - g.cdf(1))) / std::sqrt(y));
  };
  checkA(o.yA_lo, s.pi(o.yA_lo));
  checkA(o.yA_hi, s.pi(o.yA_hi));
  for (size_t i = 0; i < s.primes.size(); ++i) {
    checkA(s.primes[i], static_cast<double>(i + 1));
    checkA(s.primes[i], static_cast<double>(i));
  }
  // (B)
  for (double t : o.tB) {
    auto S = exp_sum_many(s, o.yB, t);
    for (size_t i = 0; i < o.yB.size(); ++i) {
      double y = o.yB[i];
      double dev = std::abs(S[i] - exp_sum_continuous(g.pi, y, t));
      r.B_const = std::max(r.B_const, dev / std::sqrt(y * std::log(t)));
    }
  }
  // (C) on the integer lattice.
  double lt4 = std::pow(w.log_tau, 0.25);
  for (size_t a = 0; a < w.n.size(); ++a) {
    auto S = exp_sum_many(s, w.m, static_cast<double>(w.n[a]));
    for (size_t b = 0; b < w.m.size(); ++b) {
      double dev = std::abs(S[b] - w.S_C[a][b]);
      double ratio = dev / (std::sqrt(w.m[b]) * lt4);
      r.C_const = std::max(r.C_const, ratio);
      bool ex = ratio >= o.threshold_const;
      r.C_exceed_mask.push_back(ex);
      r.C_exceed += ex;
      ++r.C_cells;
    }
  }
  return r;
}

struct MonteCarloReport {
  int seeds = 0;
  double max_A_const = 0, max_B_const = 0, max_C_const = 0;
  double freq_union = 0;      // fraction of seeds with an exceedance anywhere on the lattice
  double envelope_union = 0;  // min(1, Σ_cells 4 exp(−(1/8) log m √log τ_k))
  double max_cell_ratio = 0;  // max over cells of frequency / (4 exp(−(1/8) log m √log τ_k))
  // |mean S − S_C| against √y + 4 standard errors on the mean-check points.
  struct MeanCheck {
    double y = 0, t = 0, dev = 0, allowed = 0;
    bool pass = false;
  };
  std::vector<MeanCheck> mean_checks;
  bool mean_ok = true;
};

inline MonteCarloReport monte_carlo(const SamplingGrid& g, const CWindow& w, const BoundsOptions& o, int seeds,
                                    uint64_t first_seed = 1, unsigned threads = 1,
                                    std::vector<double> mean_y = {1e2, 1e3, 1e4, 1e5, 1e6}) {
  MonteCarloReport R;
  R.seeds = seeds;
  std::vector<double> mean_t;
  for (long n : w.n) mean_t.push_back(static_cast<double>(n));
  std::sort(mean_y.begin(), mean_y.end());
  std::vector<DeviationReport> reps(static_cast<size_t>(seeds));
  std::vector<std::vector<cplx>> means(static_cast<size_t>(seeds));
  perron_detail::parallel_for(static_cast<size_t>(seeds), threads, [&](size_t i) {
    auto s = sample(g, first_seed + i);
    reps[i] = check_bounds(g, s, w, o);
    for (double t : mean_t) {
      auto S = exp_sum_many(s, mean_y, t);
      means[i].insert(means[i].end(), S.begin(), S.end());
    }
  });
  std::vector<long> cell_hits(static_cast<size_t>(w.n.size() * w.m.size()), 0);
  long union_hits = 0;
  for (const auto& r : reps) {
    R.max_A_const = std::max(R.max_A_const, r.A_const);
    R.max_B_const = std::max(R.max_B_const, r.B_const);
    R.max_C_const = std::max(R.max_C_const, r.C_const);
    union_hits += r.C_exceed > 0;
    for (size_t c = 0; c < r.C_exceed_mask.size(); ++c) cell_hits[c] += r.C_exceed_mask[c];
  }
  R.freq_union = static_cast<double>(union_hits) / seeds;
  double sl = std::sqrt(w.log_tau), env_sum = 0;
  for (size_t a = 0; a < w.n.size(); ++a)
    for (size_t b = 0; b < w.m.size(); ++b) {
      double env = 4 * std::exp(-std::log(w.m[b]) * sl / 8);
      env_sum += env;
      double f = static_cast<double>(cell_hits[a * w.m.size() + b]) / seeds;
      R.max_cell_ratio = std::max(R.max_cell_ratio, f / std::min(1.0, env));
    }
  R.envelope_union = std::min(1.0, env_sum);
  size_t idx = 0;
  for (double t : mean_t)
    for (double y : mean_y) {
      cplx mean = 0;
      for (const auto& m : means) mean += m[idx];
      mean /= static_cast<double>(seeds);
      double var = 0;
      for (const auto& m : means) var += std::norm(m[idx] - mean);
      var /= std::max(1, seeds - 1);
      double se = std::sqrt(var / seeds);
      MonteCarloReport::MeanCheck c;
      c.y = y;
      c.t = t;
      c.dev = std::abs(mean - exp_sum_continuous(g.pi, y, t));
      c.allowed = std::sqrt(y) + 4 * se;
      c.pass = c.dev <= c.allowed;
      R.mean_ok = R.mean_ok && c.pass;
      R.mean_checks.push_back(c);
      ++idx;
    }
  return R;
}

// ---- log ζ_0 − log ζ_C and the augmentation ----

// D(s) = Σ_{p ≤ Y} −log(1 − p^{−s}) − ∫_1^Y u^{−s} dΠ_C(u): the sampled primes up to Y with the continuum beyond.
// Phases of p^{−iT0} are reduced once in high precision; evaluation is at s = σ + i(T0 + dt).
class ZetaDifference {
 public:
  ZetaDifference(const RandomDiscreteSystem& s, const Measure& pi, const Real& T0) : s_(s), pi_(pi) {
    unsigned bits = std::max(bits_of(T0), 128u);
    PrecisionGuard g(bits);
    T0_ = T0;
    T0_d_ = to_double(T0);
    logs_.reserve(s.primes.size());
    phases_.reserve(s.primes.size());
    for (double p : s.primes) {
      Real lp = hpm::log(Real(p));
      logs_.push_back(to_double(lp));
      phases_.push_back(reduce_mod_2pi(T0 * lp).r);
    }
  }

  const Real& T0() const { return T0_; }

  cplx discrete_part(double sigma, double dt) const {
    cplx acc = 0;
    for (size_t i = 0; i < logs_.size(); ++i) {
      double lp = logs_[i];
      cplx z = std::polar(std::exp(-sigma * lp), -(phases_[i] + dt * lp));
      acc += neg_log1m(z);
    }
    return acc;
  }

  // ∫_1^Y u^{−s} dΠ_C. Closed form while t log Y stays resolvable in double; otherwise zero with the
  // integration-by-parts bound in *bound.
  cplx continuous_part(double sigma, double dt, double* bound = nullptr) const {
    double t = T0_d_ + dt, Y = s_.y_max;
    if (bound) *bound = 0;
    if (Y <= 1) return 0;
    if (std::fabs(t) * std::log(Y) < 1e9) return pi_.mellin_stieltjes(cplx(sigma, t), Y).value;
    double tau_max = 0;
    for (const auto& seg : pi_.segments)
      if (seg.kind == DensityKind::SineChunkDerivative && seg.la < std::log(Y)) tau_max = std::max(tau_max, seg.chunk.tau);
    double dens = (1 + tau_max) * Y;  // bounds the density per dv times u^{−σ} on [0, log Y] up to the factor Y^{1−σ}/Y
    if (bound) *bound = 2 * dens * (1 + tau_max + std::log(Y)) / (std::fabs(t) - tau_max);
    return 0;
  }

  cplx operator()(double sigma, double dt) const { return discrete_part(sigma, dt) - continuous_part(sigma, dt); }

 private:
  const RandomDiscreteSystem& s_;
  const Measure& pi_;
  Real T0_;
  double T0_d_ = 0;
  std::vector<double> logs_, phases_;
};

// |D_{Y_{i+1}}(s) − D_{Y_i}(s)| for the truncations of D at the given cut points.
inline std::vector<double> cauchy_differences(const RandomDiscreteSystem& s, const Measure& pi, double sigma, double t,
                                              const std::vector<double>& cuts) {
  std::vector<cplx> vals;
  for (double Y : cuts) {
    RandomDiscreteSystem c = s;
    c.y_max = std::min(Y, s.y_max);
    c.primes.resize(static_cast<size_t>(s.pi(c.y_max)));
    vals.push_back(ZetaDifference(c, pi, Real(t))(sigma, 0));
  }
  std::vector<double> d;
  for (size_t i = 1; i < vals.size(); ++i) d.push_back(std::abs(vals[i] - vals[i - 1]));
  return d;
}

inline int arc_index(double theta) {
  const double w = std::numbers::pi / 80;
  double x = std::fmod(theta + w / 2, 2 * std::numbers::pi);
  if (x < 0) x += 2 * std::numbers::pi;
  int m = static_cast<int>(std::floor(x / w));
  return std::min(m, 159);
}

// α ∈ [0, π/2] with sin α/(1 − (π/80) cos α) = r, r ∈ [0, 1].
inline double alpha_arc(double r, double* bracket_lo = nullptr, double* bracket_hi = nullptr) {
  auto g = [r](double a) { return std::sin(a) / (1 - std::numbers::pi / 80 * std::cos(a)) - r; };
  if (bracket_lo) *bracket_lo = g(0);
  if (bracket_hi) *bracket_hi = g(std::numbers::pi / 2);
  if (g(0) == 0) return 0;
  return find_root_bracketed_ex(g, 0.0, std::numbers::pi / 2, 1e-15).x;
}

struct AugmentTermReport {
  int k = 0;
  double im_D = 0;   // Im(log ζ_0 − log ζ_C)(1 + iτ_k)
  int arc = 0;
  double target = 0;  // π/2 or α
  double dev = 0;     // signed distance of τ_k log p from target + 2πℤ
  double dev_allowed = 0;
  bool dev_ok = false;
  double sin_minus_1 = 0;
  double added_im = 0;      // Im(−M log(1 − p^{−1−iτ_k}))
  double ineq_value = 0;    // |added_im + (arc of this parity) π/80|
  bool ineq_ok = false;     // < π/40
  double F_dist = 0;        // d(Im F(1+iτ_k), 2πℤ)
};

struct Augmentation {
  AugmentationRecord record;
  int m = 0, l = 0;  // arcs for even and odd k
  bool swapped = false;  // l > m: odd k aim at π/2
  double alpha = 0;
  std::vector<Real> eps;
  std::vector<double> lambda;
  std::vector<AugmentTermReport> terms;
  bool none = false;  // m = l = 0: nothing added
};

inline double dist_2pi_z(double x) {
  double r = std::remainder(x, 2 * std::numbers::pi);
  return std::fabs(r);
}

inline Augmentation augment(const RandomDiscreteSystem& s, const ContinuousPrimeSystem& sys, const Measure& pi) {
  Augmentation A;
  const int K = sys.K;
  std::vector<double> imD(static_cast<size_t>(K));
  std::vector<int> arcs(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k) {
    ZetaDifference D(s, pi, sys.term(k).tau);
    imD[static_cast<size_t>(k)] = D(1.0, 0).imag();
    arcs[static_cast<size_t>(k)] = arc_index(imD[static_cast<size_t>(k)]);
  }
  // Most frequent arc per parity (ties to the smaller index).
  auto pick = [&](int parity) {
    std::vector<int> cnt(160, 0);
    for (int k = parity; k < K; k += 2) ++cnt[static_cast<size_t>(arcs[static_cast<size_t>(k)])];
    return static_cast<int>(std::max_element(cnt.begin(), cnt.end()) - cnt.begin());
  };
  A.m = pick(0);
  A.l = K > 1 ? pick(1) : 0;
  A.swapped = A.l > A.m;
  int M = std::max(A.m, A.l);
  A.record.m_aug = M;
  if (M == 0) {
    A.none = true;
    return A;
  }
  double r = static_cast<double>(std::min(A.m, A.l)) / M;
  A.alpha = alpha_arc(r);

  unsigned bits = 128;
  for (const auto& t : sys.terms) bits = std::max(bits, bits_of(t.tau));
  for (const auto& t : sys.terms)
    if (std::log2(t.tau_d * 4) + 64 > bits) fail(ErrorKind::InsufficientPrecision, "τ_k log p needs more bits");
  PrecisionGuard g(bits);
  Real cum = hpm::log(Real(80) / hp_pi());
  auto target_of = [&](int k) {
    bool main = (k % 2 == 0) != A.swapped;
    return main ? std::numbers::pi / 2 : A.alpha;
  };
  for (int k = 0; k < K; ++k) {
    const Real& tau = sys.term(k).tau;
    Real lam = reduce_mod_2pi_hp(Real(target_of(k)) - tau * cum);
    A.lambda.push_back(to_double(lam));
    A.eps.push_back(lam / tau);
    cum += lam / tau;
  }
  A.record.p = hpm::exp(cum);

  const double w = std::numbers::pi / 80;
  for (int k = 0; k < K; ++k) {
    AugmentTermReport T;
    T.k = k;
    const SystemTerm& term = sys.term(k);
    T.im_D = imD[static_cast<size_t>(k)];
    T.arc = arcs[static_cast<size_t>(k)];
    T.target = target_of(k);
    Real phase = reduce_mod_2pi_hp(term.tau * cum);
    T.dev = std::remainder(to_double(phase) - T.target, 2 * std::numbers::pi);
    double tail = 0;
    for (int n = k + 1; n < K; ++n) tail += std::exp(5 * term.log_tau_d - sys.term(n).log_tau_d);
    tail *= 2 * std::numbers::pi;
    double floor = std::ldexp(1.0, -static_cast<int>(bits) + 16) * term.tau_d;
    T.dev_allowed = std::max(10 * tail * std::exp(-4 * term.log_tau_d), floor);
    T.dev_ok = std::fabs(T.dev) <= T.dev_allowed;
    double ph = to_double(phase);
    T.sin_minus_1 = std::sin(ph) - 1;
    double pinv = to_double(1 / A.record.p);
    T.added_im = -M * std::atan2(pinv * std::sin(ph), 1 - pinv * std::cos(ph));
    bool main = (k % 2 == 0) != A.swapped;
    int arc_here = main ? M : std::min(A.m, A.l);
    T.ineq_value = std::fabs(T.added_im + arc_here * w);
    T.ineq_ok = T.ineq_value < std::numbers::pi / 40;
    T.F_dist = dist_2pi_z(T.im_D + T.added_im);
    A.terms.push_back(T);
  }
  return A;
}

struct FPhaseReport {
  int k = 0;
  double dist_at_1 = 0;   // d(Im F(1 + iτ_k), 2πℤ)
  double max_dist_path = 0;  // max over descent samples of d(Im F(s), 2πℤ)
  double max_int_F_prime = 0;  // max |F(s) − F(1+iτ_k)|
  double int_constant = 0;     // max_int_F_prime / ((llτ)^{1/3}/(lτ)^{1/12})
  double continuous_bound = 0;  // truncation bound when ∫ dΠ_C was replaced by zero
  size_t samples = 0;
  bool path_ok = false;  // max_dist_path < π/20
};

// F(s) = log ζ_0 − log ζ_C − M log(1 − p^{−s}) at 1 + iτ_k and along the given descent paths.
inline FPhaseReport F_phase_check(const RandomDiscreteSystem& s, const Measure& pi, const std::optional<AugmentationRecord>& aug,
                                  const SystemTerm& term, const std::vector<DescentPath>& paths) {
  FPhaseReport R;
  R.k = term.k;
  ZetaDifference D(s, pi, term.tau);
  double lp = 0, ph0 = 0;
  int M = 0;
  if (aug && aug->m_aug > 0) {
    PrecisionGuard g(std::max(bits_of(term.tau), 128u));
    Real L = hpm::log(aug->p);
    lp = to_double(L);
    ph0 = reduce_mod_2pi(term.tau * L).r;
    M = aug->m_aug;
  }
  auto F = [&](double sigma, double dt) {
    double b = 0;
    cplx v = D.discrete_part(sigma, dt) - D.continuous_part(sigma, dt, &b);
    R.continuous_bound = std::max(R.continuous_bound, b);
    if (M > 0) v -= static_cast<double>(M) * std::log(1.0 - std::polar(std::exp(-sigma * lp), -(ph0 + dt * lp)));
    return v;
  };
  cplx F1 = F(1.0, 0);
  R.dist_at_1 = dist_2pi_z(F1.imag());
  for (const auto& p : paths)
    for (const auto& smp : p.samples) {
      cplx v = F(smp.sigma, smp.t_offset);
      R.max_dist_path = std::max(R.max_dist_path, dist_2pi_z(v.imag()));
      R.max_int_F_prime = std::max(R.max_int_F_prime, std::abs(v - F1));
      ++R.samples;
    }
  double lt = term.log_tau_d;
  R.int_constant = R.max_int_F_prime / (std::cbrt(std::log(lt)) / std::pow(lt, 1.0 / 12));
  R.path_ok = R.max_dist_path < std::numbers::pi / 20;
  return R;
}

// Manifest reference + seed + j0 + augmentation.
inline nlohmann::json sample_json(const RandomDiscreteSystem& s, const std::string& manifest) {
  nlohmann::json j;
  j["manifest"] = manifest;
  j["seed"] = s.seed;
  j["j0"] = s.j0;
  j["y_max"] = s.y_max;
  j["primes"] = s.primes.size();
  if (s.augmentation) {
    j["augmentation"] = {{"p", hp_to_string(s.augmentation->p)}, {"m_aug", s.augmentation->m_aug}};
  } else {
    j["augmentation"] = nullptr;
  }
  return j;
}

}  // namespace beurling
