#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "beurling/system/system.hpp"

using namespace beurling;

namespace {

BuildOptions opts(int K, unsigned bits = 256) {
  BuildOptions o;
  o.K = K;
  o.tau_floor = 3;
  o.relaxed = true;
  o.ctx.bits = bits;
  return o;
}

const std::pair<ContinuousPrimeSystem, BuildReport>& k2_256() {
  static auto r = build_system(opts(2, 256));
  return r;
}

}  // namespace

TEST(SystemBuild, K1ResidualsTiny) {
  auto [sys, rep] = build_system(opts(1));
  ASSERT_EQ(sys.K, 1);
  EXPECT_GT(sys.term(0).tau_d, 3.0);
  auto& t = rep.terms[0];
  EXPECT_LT(t.residual_b_delta, 1e-30);
  EXPECT_LT(t.residual_b_nu, 1e-30);
  EXPECT_LT(t.residual_c, 1e-30);
  EXPECT_LT(t.d_distance, t.d_threshold);
  EXPECT_TRUE(rep.all_ok());
}

TEST(SystemBuild, K2AllPropertiesHold) {
  auto& [sys, rep] = k2_256();
  ASSERT_EQ(sys.K, 2);
  for (auto& t : rep.terms) {
    EXPECT_TRUE(t.all_ok()) << "k=" << t.k;
    EXPECT_LT(t.residual_b_delta, std::ldexp(1.0, -80));
    EXPECT_LT(t.residual_c, std::ldexp(1.0, -80));
  }
  // τ_1 > (2τ_0)^5 compared at full precision.
  PrecisionGuard g(bits_of(sys.term(1).tau));
  EXPECT_GT(sys.term(1).tau, hpm::pow(2 * sys.term(0).tau, 5));
  EXPECT_GT(sys.term(1).log_x, sys.term(0).log_x);
}

TEST(SystemBuild, ParityOfLogXPhase) {
  auto& [sys, rep] = k2_256();
  for (int k = 0; k < sys.K; ++k) {
    auto& t = sys.term(k);
    PrecisionGuard g(bits_of(t.tau));
    Real v = t.tau * t.log_x / hp_pi();
    Real n = hpm::round(v);
    long long ni = n.convert_to<long long>();
    EXPECT_EQ(((ni % 2) + 2) % 2, k % 2) << "k=" << k;
  }
}

TEST(SystemBuild, IndependentRebuildAt512Agrees) {
  auto& [s256, r256] = k2_256();
  auto [s512, r512] = build_system(opts(2, 512));
  for (int k = 0; k < 2; ++k) {
    PrecisionGuard g(512);
    Real rel = hpm::abs(s512.term(k).tau - s256.term(k).tau) / s512.term(k).tau;
    EXPECT_LT(to_double(rel), 1e-60) << "k=" << k;
    // Residuals shrink with more bits.
    EXPECT_LT(r512.terms[k].residual_b_delta, r256.terms[k].residual_b_delta * 1e-30 + 1e-300);
    EXPECT_LT(r512.terms[k].residual_c, r256.terms[k].residual_c * 1e-30 + 1e-300);
    EXPECT_TRUE(r512.terms[k].all_ok());
  }
}

TEST(SystemBuild, DerivedIdentities) {
  auto& [sys, rep] = k2_256();
  for (auto& t : sys.terms) {
    PrecisionGuard g(bits_of(t.tau));
    EXPECT_GT(t.delta_d, 0);
    EXPECT_LT(t.delta_d, 1);
    // τ^δ = e^a log τ.
    Real lhs = hpm::exp(t.delta * t.log_tau), rhs = hpm::exp(t.a) * t.log_tau;
    EXPECT_LT(to_double(hpm::abs(lhs / rhs - 1)), 1e-60);
    // 2 log²τ = log x log log x to a few ulps.
    Real e = 2 * t.log_tau * t.log_tau - t.log_x * hpm::log(t.log_x);
    EXPECT_LE(to_double(hpm::abs(e)), std::ldexp(to_double(t.log_x * hpm::log(t.log_x)), -(int)bits_of(t.tau) + 2));
    EXPECT_GE(t.a_d, std::log(6.0));
    EXPECT_LE(t.a_d, std::log(6.0) + 1);
    EXPECT_GE(t.a_d, std::log(2 * t.nu_d));
    EXPECT_GE(t.nu_d, 2.0);
    EXPECT_LE(t.nu_d, 3.0);
  }
}

TEST(SystemBuild, DTargetIncreasesAndCrosses) {
  // The (d) target is increasing on the scanned range and reaches every next integer.
  PrecisionGuard g(128);
  Real alpha = hpm::log(Real(6)) + Real(1) / 2;
  Real prev = sysdetail::d_target(Real(20), sysdetail::D_of(Real(20), alpha));
  Real start = prev;
  for (int i = 1; i <= 400; ++i) {
    Real y = Real(20) * hpm::pow(Real("1.02"), i);
    Real cur = sysdetail::d_target(y, sysdetail::D_of(y, alpha));
    EXPECT_GT(cur, prev) << "y=" << to_double(y);
    prev = cur;
  }
  EXPECT_GT(to_double(prev - start), 10.0);
}

TEST(SystemBuild, TauFloorRespected) {
  BuildOptions o = opts(1);
  o.tau_floor = 5000;
  auto [sys, rep] = build_system(o);
  EXPECT_GT(sys.term(0).tau_d, 5000.0);
  EXPECT_TRUE(rep.all_ok());
}

TEST(SystemBuild, BadArgumentsRejected) {
  BuildOptions o = opts(1);
  o.tau_floor = 2;
  EXPECT_THROW(build_system(o), Error);
}

TEST(SystemBuild, LiteralModeInfeasibleBeyondFirstTerm) {
  BuildOptions o = opts(2);
  o.relaxed = false;
  try {
    build_system(o);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::InsufficientPrecision || e.kind() == ErrorKind::SearchFailed);
  }
}

TEST(SystemBuild, FixedBitsTooSmallThrows) {
  BuildOptions o = opts(2, 64);
  o.auto_bits = false;
  try {
    build_system(o);
    FAIL() << "expected InsufficientPrecision";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientPrecision);
  }
}

TEST(SystemVerify, PerturbedTauBreaksB) {
  auto sys = k2_256().first;
  {
    PrecisionGuard g(bits_of(sys.terms[0].tau));
    sys.terms[0].tau += Real("1e-3");
  }
  auto rep = verify_properties(sys);
  EXPECT_FALSE(rep.terms[0].b_ok());
  EXPECT_TRUE(rep.terms[1].b_ok());
}

TEST(SystemVerify, EmptySystemVacuous) {
  auto rep = verify_properties(empty_system());
  EXPECT_TRUE(rep.terms.empty());
  EXPECT_TRUE(rep.all_ok());
}

TEST(SystemEpsilon, EnvelopesAndMinimality) {
  auto& [sys, rep] = k2_256();
  auto checks = epsilon_bound_check(sys, rep, 400);
  ASSERT_EQ(checks.size(), 2u);
  for (auto& c : checks) {
    EXPECT_GT(c.epsilon, 0);
    EXPECT_GT(c.eta, 0);
    EXPECT_LT(c.epsilon_ratio, 10) << "k=" << c.k;
    EXPECT_LT(c.eta_ratio, 10) << "k=" << c.k;
    EXPECT_TRUE(c.smallest_epsilon);
    EXPECT_TRUE(c.smallest_eta);
  }
}

TEST(SystemManifest, RoundTripLossless) {
  auto& [sys, rep] = k2_256();
  std::stringstream ss;
  write_manifest(ss, sys);
  auto back = read_manifest(ss);
  ASSERT_EQ(back.K, sys.K);
  for (int k = 0; k < sys.K; ++k) {
    PrecisionGuard g(bits_of(sys.term(k).tau));
    EXPECT_EQ(back.term(k).log_x, sys.term(k).log_x);
    EXPECT_EQ(back.term(k).a, sys.term(k).a);
    EXPECT_EQ(back.term(k).nu, sys.term(k).nu);
    EXPECT_EQ(back.term(k).tau, sys.term(k).tau);
  }
  EXPECT_TRUE(verify_properties(back).all_ok());
}

TEST(SystemManifest, ToyRoundTrip) {
  auto toy = make_toy_system(50, 0.3, 2, 25);
  std::stringstream ss;
  write_manifest(ss, toy);
  auto back = read_manifest(ss);
  EXPECT_TRUE(back.term(0).toy);
  EXPECT_NEAR(back.term(0).delta_d, 0.3, 1e-15);
  EXPECT_NEAR(back.term(0).tau_d, 50, 1e-12);
}

TEST(SystemManifest, MalformedRejected) {
  std::stringstream ss("bits = 256\nK = 1\n");
  EXPECT_THROW(read_manifest(ss), Error);
}

TEST(PiC, CdfMatchesClosedFormAtChunk) {
  auto& [sys, rep] = k2_256();
  Measure m = pi_c_measure(sys);
  const auto& t = sys.term(0);
  // Inside the chunk Π_C = P + sin(τ log u); at the left end sin vanishes by (b).
  double la = t.B_log_tau_d(), lb = t.nu_log_tau_d();
  EXPECT_NEAR(m.continuous_cdf_log(la) / p_of_log(la), 1.0, 1e-9);
  double v = la + 0.37 * (lb - la);
  double expect = p_of_log(v) + std::sin(t.tau_d * v);
  EXPECT_NEAR(m.continuous_cdf_log(v), expect, 1e-6 * p_of_log(v));
  EXPECT_NEAR(m.continuous_cdf_log(lb + 1) / p_of_log(lb + 1), 1.0, 1e-9);
}

TEST(PiC, DensityNonNegativeOnChunk) {
  auto& [sys, rep] = k2_256();
  Measure m = pi_c_measure(sys);
  const auto& t = sys.term(0);
  EXPECT_GE(pi_c_density_lower_bound(t), 0.0);
  double la = t.B_log_tau_d(), lb = t.nu_log_tau_d();
  for (int i = 0; i < 20000; ++i) {
    double v = la + (lb - la) * (i + 0.5) / 20000;
    ASSERT_GE(m.density_log(v), 0.0) << "v=" << v;
  }
}

TEST(PiC, ToyHasJumpAtoms) {
  auto toy = make_toy_system(50, 0.3, 2, 25);
  Measure m = pi_c_measure(toy);
  const auto& t = toy.term(0);
  double la = t.B_log_tau_d();
  double jump = std::sin(t.tau_d * la);
  ASSERT_FALSE(m.atoms.empty());
  EXPECT_NEAR(m.atoms.begin()->second, jump, 1e-9);
}
