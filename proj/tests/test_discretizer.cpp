#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "beurling/discretizer/discretizer.hpp"

using namespace beurling;

namespace {

const ContinuousPrimeSystem& sys2() {
  static ContinuousPrimeSystem s = [] {
    BuildOptions o;
    o.K = 2;
    return build_system(o).first;
  }();
  return s;
}

const SamplingGrid& grid() {
  static SamplingGrid g = build_grid(sys2());
  return g;
}

// Composite Simpson of f on [a, b] with n (even) panels.
template <class F>
auto simpson(F f, double a, double b, long n) {
  double h = (b - a) / static_cast<double>(n);
  auto acc = f(a) + f(b);
  for (long i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return acc * (h / 3);
}

// Π_C(u) − Π_C(1) below the first chunk: ∫_0^{log u} (e^v − 1)/v dv.
double pi_c_low(double u) {
  return simpson([](double v) { return v == 0 ? 1.0 : std::expm1(v) / v; }, 0.0, std::log(u), 2000);
}

}  // namespace

TEST(Grid, NodesAreFourthRootOfLog) {
  EXPECT_NEAR(SamplingGrid::u_of(16), std::pow(4 * std::log(2.0), 0.25), 1e-15);
  const auto& g = grid();
  EXPECT_DOUBLE_EQ(g.u[16 - static_cast<size_t>(g.j0)], SamplingGrid::u_of(16));
  EXPECT_NEAR(g.u_last(), std::pow(20 * std::log(2.0), 0.25), 1e-14);
}

TEST(Grid, FirstIndexIsMinimalWithHalfMass) {
  const auto& g = grid();
  EXPECT_GE(g.j0, 3);
  EXPECT_LE(pi_c_low(SamplingGrid::u_of(g.j0)), 0.5 + 1e-12);
  if (g.j0 > 3) {
    long j = g.j0 - 1;
    bool ok = pi_c_low(SamplingGrid::u_of(j)) <= 0.5 &&
              pi_c_low(SamplingGrid::u_of(j + 1)) - pi_c_low(SamplingGrid::u_of(j)) <= 0.5;
    EXPECT_FALSE(ok);
  }
}

TEST(Grid, CellMassesTelescopeToPiC) {
  const auto& g = grid();
  double sum = 0;
  for (size_t i = 0; i < g.q.size(); ++i) {
    EXPECT_GE(g.q[i], 0.0);
    EXPECT_LE(g.q[i], 0.5);
    sum += g.q[i];
    if (i == 0 || i == 100 || i == 10000 || i + 1 == g.q.size()) EXPECT_NEAR(sum, pi_c_low(g.u[i]), 1e-9) << i;
  }
  EXPECT_LE(g.tail_q_bound, 1e-6);
}

TEST(Grid, PoissonBinsCoverTheTailMass) {
  const auto& g = grid();
  double mu = 0, row = 0;
  for (size_t i = 1; i < g.tab_c.size(); ++i) row = std::max(row, g.tab_c[i] - g.tab_c[i - 1]);
  for (double m : g.bin_mu) {
    EXPECT_GT(m, 0.0);
    EXPECT_LE(m, 4 + row);
    mu += m;
  }
  EXPECT_NEAR(mu, g.cdf(1e6) - g.cdf(g.u_last()), 1e-6 * mu);
}

TEST(Sample, ReproducibleAndNested) {
  const auto& g = grid();
  auto a = sample(g, 7), b = sample(g, 7), c = sample(g, 8), d = sample(g, 7, 1e4);
  EXPECT_EQ(a.primes, b.primes);
  EXPECT_NE(a.primes, c.primes);
  std::vector<double> pre(a.primes.begin(), a.primes.begin() + static_cast<long>(a.pi(1e4)));
  EXPECT_EQ(pre, d.primes);
  EXPECT_TRUE(std::is_sorted(a.primes.begin(), a.primes.end()));
}

TEST(Sample, FirstCellFrequencyWithinFourSigma) {
  const auto& g = grid();
  const int n = 4000;
  int hits0 = 0, hits5 = 0;
  for (int s = 0; s < n; ++s) {
    auto r = sample(g, 1000 + s, 2.0);
    for (long j : r.exact_selected) {
      hits0 += j == g.j0;
      hits5 += j == g.j0 + 5;
    }
  }
  for (auto [hits, q] : {std::pair{hits0, g.q[0]}, std::pair{hits5, g.q[5]}}) {
    double sd = std::sqrt(n * q * (1 - q));
    EXPECT_NEAR(hits, n * q, 4 * sd);
  }
}

TEST(Sample, TailCountMatchesPiCMass) {
  const auto& g = grid();
  const int n = 40;
  const double y = 1e5;
  double mass = g.cdf(y) - g.cdf(g.u_last()), sum = 0;
  for (int s = 0; s < n; ++s) {
    auto r = sample(g, 500 + s, y);
    sum += r.pi(y) - r.pi(g.u_last());
  }
  EXPECT_NEAR(sum / n, mass, 4 * std::sqrt(mass / n));
}

TEST(ExpSum, ZeroFrequencyCountsPrimes) {
  auto s = sample(grid(), 3, 1e5);
  for (double y : {10.0, 1e3, 1e5}) {
    EXPECT_NEAR(exp_sum(s, y, 0).real(), s.pi(y), 1e-9);
    EXPECT_LE(std::abs(exp_sum(s, y, 497.3)), s.pi(y) + 1e-9);
  }
}

TEST(ExpSum, ContinuousMatchesQuadrature) {
  const auto& g = grid();
  for (double t : {10.0, sys2().term(0).tau_d}) {
    double b = std::log(100.0);
    cplx ref = 0;
    for (const auto& seg : g.pi.segments) {
      double lo = seg.la, hi = std::min(seg.lb, b);
      if (!(hi > lo)) continue;
      ref += simpson([&](double v) { return std::polar(seg.density(v), -t * v); }, lo, hi, 400000);
    }
    EXPECT_NEAR(std::abs(exp_sum_continuous(g.pi, 100, t) - ref), 0.0, 1e-8) << t;
  }
}

TEST(ExpSum, TransferIdentityDiscrete) {
  auto s = sample(grid(), 11, 1e4);
  for (double t1 : {497.3, 12.75})
    for (double t2 : {497.0, 13.0}) {
      cplx direct = exp_sum(s, 1e4, t1), tr = transfer_exp_sum(s, 1e4, t1, t2);
      EXPECT_NEAR(std::abs(direct - tr), 0.0, 1e-9 * s.pi(1e4)) << t1 << " " << t2;
    }
}

TEST(ExpSum, TransferIdentityContinuous) {
  const auto& pi = grid().pi;
  const double y = 50, t1 = 497.3, t2 = 497.0, d = t2 - t1;
  cplx integral = simpson([&](double v) { return exp_sum_continuous(pi, std::exp(v), t2) * std::polar(1.0, d * v); },
                          1e-9, std::log(y), 4000);
  cplx rhs = std::polar(1.0, d * std::log(y)) * exp_sum_continuous(pi, y, t2) - cplx(0, d) * integral;
  EXPECT_NEAR(std::abs(rhs - exp_sum_continuous(pi, y, t1)), 0.0, 1e-6);
}

TEST(ExpSum, VariationInYBoundedByCount) {
  auto s = sample(grid(), 5, 1e4);
  for (double t : {3.0, 497.0})
    EXPECT_LE(std::abs(exp_sum(s, 5e3, t) - exp_sum(s, 2e3, t)), s.pi(5e3) - s.pi(2e3) + 1e-9);
}

TEST(Kolmogorov, PlugInValues) {
  std::vector<double> q(4, 0.5);  // Σq(1−q) = 1
  EXPECT_NEAR(kolmogorov_bound(q, 2), std::exp(-1.0), 1e-15);
  EXPECT_EQ(kolmogorov_bound(q, 0), 1.0);
  EXPECT_NEAR(kolmogorov_bound(q, 1), std::exp(-0.25), 1e-15);
}

TEST(Kolmogorov, OutsideRangeThrows) {
  std::vector<double> q(4, 0.5);
  try {
    kolmogorov_bound(q, 2.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConditionViolated);
  }
}

TEST(Kolmogorov, VarianceSandwichMonotone) {
  const auto& g = grid();
  double prev = -1;
  for (size_t J : {size_t{0}, size_t{10}, size_t{1000}, g.q.size() - 1}) {
    auto v = variance_sandwich(g, J);
    EXPECT_TRUE(v.holds) << J;
    EXPECT_GE(v.sum_var, prev);
    prev = v.sum_var;
  }
}

TEST(Bounds, SingleSeedConstants) {
  const auto& g = grid();
  auto s = sample(g, 42);
  BoundsOptions o;
  o.m_hi = 2000;
  CWindow w = make_c_window(g, sys2(), 0.0549, o);
  ASSERT_FALSE(w.n.empty());
  for (long n : w.n) EXPECT_LE(std::fabs(n - sys2().term(0).tau_d), w.half_width);
  auto r = check_bounds(g, s, w, o);
  EXPECT_LE(r.A_const, 10.0);
  EXPECT_GT(r.A_const, 0.0);
  EXPECT_GT(r.B_const, 0.0);
  EXPECT_EQ(r.C_cells, static_cast<long>(w.n.size() * w.m.size()));
}

TEST(Bounds, MonteCarloMean) {
  const auto& g = grid();
  BoundsOptions o;
  o.m_hi = 1000;
  CWindow w = make_c_window(g, sys2(), 0.0549, o);
  auto R = monte_carlo(g, w, o, 24, 100, 1, {1e2, 1e3, 1e4, 1e5});
  EXPECT_TRUE(R.mean_ok);
  EXPECT_LE(R.max_A_const, 10.0);
  EXPECT_LE(R.freq_union, 1.0);
}

TEST(Augment, AlphaSolvesArcEquation) {
  for (double r : {0.0, 0.3, 0.77, 1.0}) {
    double a = alpha_arc(r);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, std::numbers::pi / 2);
    EXPECT_NEAR(std::sin(a) / (1 - std::numbers::pi / 80 * std::cos(a)), r, 1e-12);
  }
}

TEST(Augment, ArcIndexRanges) {
  const double w = std::numbers::pi / 80;
  EXPECT_EQ(arc_index(0), 0);
  EXPECT_EQ(arc_index(w * 0.49), 0);
  EXPECT_EQ(arc_index(w * 0.51), 1);
  EXPECT_EQ(arc_index(-w * 0.49), 0);
  EXPECT_EQ(arc_index(-w * 0.51), 159);
  EXPECT_EQ(arc_index(37 * w + 2 * std::numbers::pi), 37);
}

TEST(Augment, ArctanCubicGap) {
  for (double u : {1e-3, 0.01, 0.05, 0.2, 0.5, 0.9}) EXPECT_LT(std::fabs(std::atan(u) - u), 3 * u * u * u);
}

TEST(Augment, PhasesLandOnTargets) {
  const auto& g = grid();
  auto s = sample(g, 42);
  Augmentation A = augment(s, sys2(), g.pi);
  if (A.none) GTEST_SKIP() << "both arcs are 0";
  ASSERT_EQ(A.terms.size(), 2u);
  double p0 = 80 / std::numbers::pi;
  EXPECT_NEAR(to_double(A.record.p) / p0, 1.0, 2 * std::numbers::pi / sys2().term(0).tau_d + 1e-12);
  for (const auto& t : A.terms) {
    EXPECT_TRUE(t.dev_ok) << t.k << " dev " << t.dev << " allowed " << t.dev_allowed;
    if (t.target == std::numbers::pi / 2) EXPECT_NEAR(t.sin_minus_1, 0.0, 1e-12);
  }
  EXPECT_EQ(A.record.m_aug, std::max(A.m, A.l));
}

TEST(PhaseCheck, EmptySystemGivesZero) {
  RandomDiscreteSystem s;
  s.y_max = 1;
  const auto& g = grid();
  SaddleProblem P(sys2(), 0);
  std::vector<DescentPath> paths{P.trace_descent(0)};
  auto R = F_phase_check(s, g.pi, std::nullopt, sys2().term(0), paths);
  EXPECT_EQ(R.dist_at_1, 0.0);
  EXPECT_EQ(R.max_dist_path, 0.0);
  EXPECT_EQ(R.max_int_F_prime, 0.0);
  EXPECT_GT(R.samples, 0u);
}

TEST(PhaseCheck, AugmentedValueAtOneMatchesTermReport) {
  const auto& g = grid();
  auto s = sample(g, 42);
  Augmentation A = augment(s, sys2(), g.pi);
  if (A.none) GTEST_SKIP();
  s.augmentation = A.record;
  auto R = F_phase_check(s, g.pi, s.augmentation, sys2().term(0), {});
  EXPECT_NEAR(R.dist_at_1, A.terms[0].F_dist, 1e-9);
}

TEST(Serialize, CarriesSeedAndAugmentation) {
  const auto& g = grid();
  auto s = sample(g, 42, 1e3);
  s.augmentation = AugmentationRecord{Real("25.4647908947032537"), 3};
  auto j = sample_json(s, "sys.manifest");
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["j0"], g.j0);
  EXPECT_EQ(j["augmentation"]["m_aug"], 3);
  EXPECT_EQ(Real(j["augmentation"]["p"].get<std::string>()), Real("25.4647908947032537"));
}

TEST(ZetaDifference, CauchyDifferencesShrinkAtThreeQuarters) {
  auto s = sample(grid(), 42);
  auto d = cauchy_differences(s, grid().pi, 0.75, sys2().term(0).tau_d, {1e2, 1e3, 1e4, 1e5, 1e6});
  ASSERT_EQ(d.size(), 4u);
  // A sum of N unit phases weighted by y^{−3/4} over a decade has size about √N y^{−3/4}.
  for (size_t i = 0; i < d.size(); ++i) {
    double y = std::pow(10.0, static_cast<double>(i) + 3);
    EXPECT_LE(d[i], 10 * std::sqrt(s.pi(y)) * std::pow(y / 10, -0.75)) << i;
  }
}

TEST(ZetaDifference, EmptySampleIsMinusContinuum) {
  RandomDiscreteSystem s;
  s.y_max = 50;
  const auto& pi = grid().pi;
  ZetaDifference D(s, pi, Real(30));
  EXPECT_NEAR(std::abs(D(1.2, 0.5) + pi.mellin_stieltjes(cplx(1.2, 30.5), 50).value), 0.0, 1e-13);
}
