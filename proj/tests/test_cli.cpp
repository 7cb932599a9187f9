#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "beurling/cli/cli.hpp"

using namespace beurling;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::vector<const char*> argv{"beurling"};
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("beurling_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Parse, Complex) {
  EXPECT_EQ(cli::parse_complex("1.5+100i"), cplx(1.5, 100));
  EXPECT_EQ(cli::parse_complex("0.5-14.25i"), cplx(0.5, -14.25));
  EXPECT_EQ(cli::parse_complex("2"), cplx(2, 0));
  EXPECT_EQ(cli::parse_complex("-3i"), cplx(0, -3));
  EXPECT_EQ(cli::parse_complex("1+i"), cplx(1, 1));
  EXPECT_THROW(cli::parse_complex("1.5+100"), Error);
  EXPECT_THROW(cli::parse_complex("abc"), Error);
}

TEST(Parse, LogGrid) {
  auto g = cli::parse_log_grid("e4:e14:6");
  ASSERT_EQ(g.size(), 6u);
  EXPECT_DOUBLE_EQ(g.front(), 4);
  EXPECT_DOUBLE_EQ(g[1], 6);
  EXPECT_DOUBLE_EQ(g.back(), 14);
  EXPECT_NEAR(cli::parse_log_grid("100")[0], std::log(100.0), 1e-15);
  EXPECT_THROW(cli::parse_log_grid("e4:e14"), Error);
  EXPECT_THROW(cli::parse_log_grid("e4:e2:5"), Error);
}

TEST(Dump, SeventeenDigits) {
  nlohmann::json j{{"b", 0.1}, {"a", 1.0}, {"n", 3}, {"s", "x"}};
  EXPECT_EQ(cli::dump17(j), "{\n  \"a\": 1.0,\n  \"b\": 0.10000000000000001,\n  \"n\": 3,\n  \"s\": \"x\"\n}\n");
}

TEST(Run, UsageErrorsExitOne) {
  EXPECT_EQ(run({"--no-such-flag"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"build", "--K", "1", "--unknown"}).code, 1);
  auto dir = scratch("usage");
  EXPECT_EQ(run({"--out", dir.string(), "zeta", "--s", "2"}).code, 1);  // no manifest yet
}

TEST(Run, BuildThenSaddles) {
  auto dir = scratch("build");
  auto b = run({"--out", dir.string(), "build", "--K", "1"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(fs::exists(dir / "system.manifest"));
  auto j = nlohmann::json::parse(slurp(dir / "build.json"));
  EXPECT_EQ(j["schema"], "1");
  EXPECT_EQ(j["K"], 1);
  EXPECT_TRUE(j["pass"].get<bool>());

  auto s = run({"--out", dir.string(), "saddles", "--k", "0"});
  ASSERT_EQ(s.code, 0) << s.err;
  std::string csv = slurp(dir / "saddles_k0.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "m,theta,sigma,t,re_f,im_f");
  EXPECT_TRUE(fs::exists(dir / "plot_saddles_k0.py"));
  auto sj = nlohmann::json::parse(slurp(dir / "saddles.json"));
  EXPECT_EQ(sj["saddles"].size(), 2 * sj["m_max"].get<size_t>() + 1);
  EXPECT_EQ(run({"--out", dir.string(), "saddles", "--k", "1"}).code, 1);
}

TEST(Run, ReportsAreByteIdentical) {
  auto a = scratch("rep_a"), b = scratch("rep_b");
  for (auto& d : {a, b}) {
    ASSERT_EQ(run({"--out", d.string(), "build", "--K", "1"}).code, 0);
    ASSERT_EQ(run({"--out", d.string(), "zeta", "--s", "1.5+100i", "--s", "3-2i"}).code, 0);
  }
  EXPECT_EQ(slurp(a / "build.json"), slurp(b / "build.json"));
  EXPECT_EQ(slurp(a / "zeta.json"), slurp(b / "zeta.json"));
  EXPECT_EQ(slurp(a / "system.manifest"), slurp(b / "system.manifest"));
}

TEST(Run, ConfigFileWithFlagOverride) {
  auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[build]\nK = 1\nbits = 300\n";
  auto r = run({"--out", dir.string(), "--config", (dir / "run.ini").string(), "build", "--bits", "320"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir / "build.json"));
  EXPECT_EQ(j["K"], 1);
  EXPECT_EQ(j["bits"], 320);
}

TEST(Run, ZetaMatchesLibrary) {
  auto dir = scratch("zeta");
  ASSERT_EQ(run({"--out", dir.string(), "build", "--K", "1"}).code, 0);
  ASSERT_EQ(run({"--out", dir.string(), "zeta", "--s", "1.5+100i"}).code, 0);
  std::ifstream is(dir / "system.manifest");
  ZetaEvaluator z(read_manifest(is));
  cplx want = z.log_zeta(cplx(1.5, 100));
  auto j = nlohmann::json::parse(slurp(dir / "zeta.json"));
  EXPECT_EQ(j["values"][0]["re_log_zeta"].get<double>(), want.real());
  EXPECT_EQ(j["values"][0]["im_log_zeta"].get<double>(), want.imag());
  std::string csv = slurp(dir / "log_zeta.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma,t,re_log_zeta,im_log_zeta");
}

TEST(Run, Appendix) {
  auto dir = scratch("appendix");
  auto r = run({"--out", dir.string(), "appendix", "--theta", "0.5", "--x-grid", "e4:e8:3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string csv = slurp(dir / "appendix.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,x,I_n,b_pow_n,oracle");
  auto j = nlohmann::json::parse(slurp(dir / "appendix.json"));
  EXPECT_NEAR(j["b"].get<double>(), 0.8, 1e-9);
  EXPECT_EQ(j["reconstruction"].size(), 3u);
  EXPECT_EQ(run({"--out", dir.string(), "appendix", "--theta", "1.5"}).code, 1);
}

TEST(Run, DiscretizeSingleSeed) {
  auto dir = scratch("disc");
  ASSERT_EQ(run({"--out", dir.string(), "build", "--K", "2"}).code, 0);
  auto r = run({"--out", dir.string(), "discretize", "--seed", "42", "--check", "AB"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir / "discretize.json"));
  EXPECT_EQ(j["sample"]["seed"], 42);
  EXPECT_FALSE(j["augmentation"]["none"].get<bool>());
  EXPECT_EQ(run({"--out", dir.string(), "discretize", "--check", "AZ"}).code, 1);
}

TEST(Run, AssertionFailureExitsTwoWithReport) {
  // Saddles far outside m_max have no winding-1 cell.
  auto dir = scratch("fail");
  ASSERT_EQ(run({"--out", dir.string(), "build", "--K", "1"}).code, 0);
  auto r = run({"--out", dir.string(), "saddles", "--k", "0", "--m-range=-30:30"});
  ASSERT_EQ(r.code, 2);
  auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["schema"], "1");
  EXPECT_EQ(j["status"], "fail");
  EXPECT_EQ(j["error"], "WindingNot1");
}

TEST(Binary, ExitCodes) {
  const char* bin = std::getenv("BEURLING_CLI");
  if (!bin) GTEST_SKIP() << "BEURLING_CLI not set";
  auto dir = scratch("bin");
  std::string b = std::string("\"") + bin + "\"";
  EXPECT_EQ(WEXITSTATUS(std::system((b + " --bogus >/dev/null 2>&1").c_str())), 1);
  EXPECT_EQ(WEXITSTATUS(std::system((b + " --out " + dir.string() + " build --K 1 >/dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((b + " --out " + dir.string() + " saddles --k 0 >/dev/null").c_str())), 0);
  EXPECT_TRUE(fs::exists(dir / "saddles_k0.csv"));
}
