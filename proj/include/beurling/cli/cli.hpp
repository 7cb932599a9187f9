#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "beurling/cli/acceptance.hpp"

namespace beurling::cli {

using nlohmann::json;

// Reports are written with every float at 17 significant digits and keys sorted.
inline void dump17(std::ostream& os, const json& j, int indent = 0) {
  std::string pad(static_cast<size_t>(indent + 2), ' '), end(static_cast<size_t>(indent), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        dump17(os, it.value(), indent + 2);
      }
      os << "\n" << end << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        dump17(os, j[i], indent + 2);
      }
      os << "\n" << end << "]";
      return;
    }
    case json::value_t::number_float: {
      double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      os << s;
      return;
    }
    default:
      os << j.dump();
  }
}

inline std::string dump17(const json& j) {
  std::ostringstream os;
  dump17(os, j);
  os << "\n";
  return os.str();
}

// "1.5+100i", "2", "-3i", "0.5-14.1347i".
inline cplx parse_complex(const std::string& text) {
  static const std::regex re(R"(^\s*([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)?\s*(?:([+-])\s*([0-9.]+(?:[eE][+-]?[0-9]+)?)?i)?\s*$)");
  static const std::regex pure(R"(^\s*([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)i\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, pure)) return {0, std::stod(m[1])};
  if (!std::regex_match(text, m, re) || (!m[1].matched && !m[2].matched))
    fail(ErrorKind::InvalidArgument, "cannot parse complex number '" + text + "'");
  double re_part = m[1].matched ? std::stod(m[1]) : 0;
  double im_part = 0;
  if (m[2].matched) {
    im_part = m[3].matched ? std::stod(m[3]) : 1;
    if (m[2] == "-") im_part = -im_part;
  }
  return {re_part, im_part};
}

// "e4:e14:10" or "4:14:10": n points evenly spaced in log x. A bare "eL" is one point.
inline std::vector<double> parse_log_grid(const std::string& text) {
  auto lx = [&](std::string s) {
    if (!s.empty() && s[0] == 'e') return std::stod(s.substr(1));
    double x = std::stod(s);
    if (!(x > 1)) fail(ErrorKind::InvalidArgument, "grid value must exceed 1");
    return std::log(x);
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  try {
    if (parts.size() == 1) return {lx(parts[0])};
    if (parts.size() != 3) fail(ErrorKind::InvalidArgument, "grid is lo:hi:n");
    double lo = lx(parts[0]), hi = lx(parts[1]);
    int n = std::stoi(parts[2]);
    if (n < 2 || !(hi > lo)) fail(ErrorKind::InvalidArgument, "grid needs n ≥ 2 and hi > lo");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
  } catch (const std::logic_error&) {
    fail(ErrorKind::InvalidArgument, "cannot parse grid '" + text + "'");
  }
}

struct RunConfig {
  std::string out = ".";
  std::string sys;  // manifest path; empty: <out>/system.manifest
  int bits = 256;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string config;

  int K = 2;
  double tau_floor = 3;
  bool strict = false;

  std::vector<std::string> s_values;
  std::string certify;
  int k = 0;
  std::string m_range = "auto";
  std::string mode = "composite";
  double kappa = 1.5;
  double log_x = 0;
  uint64_t seed = 42;
  std::string check = "ABC";
  int seeds = 1;
  double theta = 0.5;
  std::string x_grid = "e4:e14:10";
  int n_report = 4;
  bool quick = false;
};

class Runner {
 public:
  Runner(RunConfig cfg, std::ostream& out, std::ostream& err) : c_(std::move(cfg)), out_(out), err_(err) {}

  int build() {
    BuildOptions o;
    o.K = c_.K;
    o.tau_floor = c_.tau_floor;
    o.relaxed = !c_.strict;
    o.ctx.bits = c_.bits;
    auto [sys, rep] = build_system(o);
    std::ofstream(path("system.manifest")) << manifest_text(sys);
    json j = report("build");
    j["K"] = sys.K;
    j["bits"] = o.ctx.bits;
    for (int k = 0; k < sys.K; ++k) {
      const auto& t = rep.terms[static_cast<size_t>(k)];
      j["terms"].push_back({{"k", k},
                            {"log_tau", sys.term(k).log_tau_d},
                            {"a", sys.term(k).a_d},
                            {"log_x", sys.term(k).log_x_d},
                            {"residual_b_delta", t.residual_b_delta},
                            {"residual_b_nu", t.residual_b_nu},
                            {"residual_c", t.residual_c},
                            {"d_distance", t.d_distance},
                            {"d_threshold", t.d_threshold},
                            {"a_ok", t.a_ok},
                            {"pass", t.all_ok()}});
      if (!t.b_ok()) failure("build", "term " + std::to_string(k) + " property (b) residual");
      if (!t.c_ok()) failure("build", "term " + std::to_string(k) + " property (c) residual");
      if (!t.d_ok()) failure("build", "term " + std::to_string(k) + " property (d) distance");
      if (!t.a_ok) failure("build", "term " + std::to_string(k) + " property (a)");
    }
    out_ << "built K=" << sys.K << " at " << o.ctx.bits << " bits -> " << path("system.manifest") << "\n";
    return finish(j, "build.json");
  }

  int zeta() {
    auto sys = load();
    ZetaEvaluator z(sys);
    json j = report("zeta");
    std::vector<cplx> pts;
    for (const auto& s : c_.s_values) pts.push_back(parse_complex(s));
    for (cplx s : pts) {
      cplx lz = z.log_zeta(s);
      j["values"].push_back({{"sigma", s.real()}, {"t", s.imag()}, {"re_log_zeta", lz.real()}, {"im_log_zeta", lz.imag()}});
      out_ << "log zeta(" << s.real() << (s.imag() < 0 ? "" : "+") << s.imag() << "i) = " << lz.real()
           << (lz.imag() < 0 ? "" : "+") << lz.imag() << "i\n";
    }
    if (!pts.empty()) {
      std::ofstream os(path("log_zeta.csv"));
      write_log_zeta_csv(os, z, pts);
      plot_stub("log_zeta", "t", {"re_log_zeta", "im_log_zeta"});
    }
    if (!c_.certify.empty()) {
      GhlRegion region;
      if (c_.certify == "hl") {
        region = GhlRegion::HL;
      } else if (c_.certify == "strip") {
        region = GhlRegion::Strip;
      } else {
        fail(ErrorKind::InvalidArgument, "--certify takes hl or strip");
      }
      auto r = ghl_bound_certificate(z, region, region == GhlRegion::Strip ? c_.k : -1);
      j["certificate"] = {{"region", c_.certify}, {"k", r.k}, {"empirical_sup", r.empirical_sup}, {"envelope", r.envelope},
                          {"ratio", r.ratio}, {"sup_sigma", r.sup_sigma}, {"sup_t", r.sup_t}, {"samples", r.samples},
                          {"pass", r.pass}};
      out_ << "certificate " << c_.certify << ": sup " << r.empirical_sup << " vs envelope " << r.envelope
           << (r.pass ? " ok" : " FAIL") << "\n";
      if (!r.pass) failure("zeta", "log zeta bound exceeded in region " + c_.certify);
    }
    return finish(j, "zeta.json");
  }

  int saddles() {
    auto sys = load();
    SaddleProblem P(sys, check_k(sys));
    auto [lo, hi] = m_range(P);
    json j = report("saddles");
    j["k"] = c_.k;
    j["m_max"] = P.m_max();
    j["sigma0_approx"] = P.sigma0_approx();
    std::ofstream csv(path("saddles_k" + std::to_string(c_.k) + ".csv"));
    bool header = true;
    for (int m = lo; m <= hi; ++m) {
      auto sp = P.find_saddle(m);
      auto p = P.trace_descent(m, sp);
      auto ph = P.phase_report(m);
      P.write_path_csv(csv, p, header);
      header = false;
      bool ok = sp.newton_residual <= 1e-25 && sp.winding == 1 && sp.winding_ok;
      j["saddles"].push_back({{"m", m},
                              {"sigma", sp.sigma},
                              {"t_offset", sp.t_offset},
                              {"re_f", sp.h_val.real()},
                              {"im_f_mod_2pi", sp.im_f_mod2pi},
                              {"newton_residual", sp.newton_residual},
                              {"winding", sp.winding},
                              {"n_minus_M", sp.n_minus_M},
                              {"path_im_drift", p.max_im_drift},
                              {"path_re_decreasing", p.re_decreasing},
                              {"path_tangent_dev", p.max_tangent_dev},
                              {"phase_distance", ph.distance}});
      out_ << "m=" << m << " sigma=" << sp.sigma << " residual=" << sp.newton_residual << " winding=" << sp.winding << "\n";
      if (!ok) failure("saddles", "saddle m=" + std::to_string(m) + " not certified");
    }
    plot_stub("saddles_k" + std::to_string(c_.k), "sigma", {"t"});
    return finish(j, "saddles.json");
  }

  int perron() {
    auto sys = load();
    json j = report("perron");
    PerronOptions po;
    po.threads = c_.threads;
    if (c_.mode == "vertical") {
      ZetaEvaluator z(sys);
      double lx = c_.log_x > 0 ? c_.log_x : sys.term(check_k(sys)).log_x_d;
      auto r = perron_vertical(z, lx, c_.kappa, po);
      j["mode"] = "vertical";
      j["log_x"] = lx;
      j["kappa"] = c_.kappa;
      j["T_cut"] = r.T_cut;
      j["residue_term"] = r.residue_term;
      j["contour_value"] = r.contour_value;
      j["tail_bound"] = r.tail_bound;
      j["quad_error"] = r.quad_error;
      j["total"] = r.total;
      out_ << "int_1^x N_C(u) du at log x = " << lx << ": " << r.total << "\n";
    } else if (c_.mode == "composite") {
      SaddleProblem P(sys, check_k(sys));
      CompositeOptions co;
      co.perron = po;
      auto R = perron_composite(P, co);
      j["mode"] = "composite";
      j["k"] = c_.k;
      j["ledger"] = composite_ledger_json(R);
      for (const auto& s : R.segments) {
        out_ << s.tag << ": log10|int| = " << s.v.log_abs / std::numbers::ln10 << (s.below_saddle ? "" : "  (above saddle)") << "\n";
        if (std::isfinite(s.envelope_constant) && s.envelope_applicable && s.envelope_constant > 10)
          failure("perron", "segment " + s.tag + " exceeds its envelope");
      }
      if (!R.delta0_negative) failure("perron", "Delta0 negativity does not hold");
    } else {
      fail(ErrorKind::InvalidArgument, "--mode takes composite or vertical");
    }
    return finish(j, "perron.json");
  }

  int discretize() {
    auto sys = load();
    check_k(sys);
    for (char ch : c_.check)
      if (ch != 'A' && ch != 'B' && ch != 'C') fail(ErrorKind::InvalidArgument, "--check takes letters from ABC");
    bool want_A = c_.check.find('A') != std::string::npos, want_B = c_.check.find('B') != std::string::npos,
         want_C = c_.check.find('C') != std::string::npos;
    SamplingGrid g = build_grid(sys);
    auto s = sample(g, c_.seed);
    json j = report("discretize");
    j["grid"] = {{"j0", g.j0}, {"J_exact", g.J_exact}, {"y_max", g.y_max}, {"sup_q", g.sup_q}};
    if (c_.k == 0) {
      Augmentation A = augment(s, sys, g.pi);
      if (!A.none) s.augmentation = A.record;
      j["augmentation"] = {{"m", A.m}, {"l", A.l}, {"alpha", A.alpha}, {"none", A.none}};
      for (const auto& t : A.terms) {
        j["augmentation"]["terms"].push_back({{"k", t.k}, {"arc", t.arc}, {"dev", t.dev}, {"dev_allowed", t.dev_allowed},
                                              {"ineq", t.ineq_value}, {"F_dist_at_1", t.F_dist}});
        if (!t.dev_ok || !t.ineq_ok) failure("discretize", "augmentation target missed for k=" + std::to_string(t.k));
      }
    }
    j["sample"] = sample_json(s, manifest_path());
    BoundsOptions bo;
    bo.k = c_.k;
    if (want_C || c_.seeds > 1) {
      SaddleProblem P(sys, c_.k);
      double cdp = build_composite_geometry(P, {}).cdp.value;
      CWindow w = make_c_window(g, sys, cdp, bo);
      j["c_window"] = {{"n", w.n}, {"half_width", w.half_width}, {"c_doubleprime", cdp}};
      auto R = monte_carlo(g, w, bo, std::max(1, c_.seeds), c_.seed, c_.threads);
      j["checks"] = {{"seeds", R.seeds}, {"first_seed", c_.seed}, {"A_const", R.max_A_const}, {"B_const", R.max_B_const},
                     {"C_const", R.max_C_const}, {"freq_union", R.freq_union}, {"envelope_union", R.envelope_union},
                     {"max_cell_ratio", R.max_cell_ratio}, {"mean_ok", R.mean_ok}};
      out_ << R.seeds << " seeds: A " << R.max_A_const << ", B " << R.max_B_const << ", C " << R.max_C_const
           << ", exceedance freq " << R.freq_union << "\n";
      if (want_A && R.max_A_const > 10) failure("discretize", "(A) constant above 10");
      if (want_B && R.max_B_const > 10) failure("discretize", "(B) constant above 10");
      if (want_C && (R.freq_union > 2 * R.envelope_union || R.max_cell_ratio > 2))
        failure("discretize", "(C) exceedance frequency above twice its envelope");
      if (R.seeds > 1 && !R.mean_ok) failure("discretize", "mean deviation check");
    } else {
      CWindow none;
      none.k = c_.k;
      auto r = check_bounds(g, s, none, bo);
      j["checks"] = {{"seeds", 1}, {"A_const", r.A_const}, {"B_const", r.B_const}};
      out_ << "seed " << c_.seed << ": A " << r.A_const << ", B " << r.B_const << "\n";
      if (want_A && r.A_const > 10) failure("discretize", "(A) constant above 10");
      if (want_B && r.B_const > 10) failure("discretize", "(B) constant above 10");
    }
    return finish(j, "discretize.json");
  }

  int appendix() {
    auto d = DeviationMeasure::toy(c_.theta);
    auto lxs = parse_log_grid(c_.x_grid);
    double L = *std::max_element(lxs.begin(), lxs.end());
    double b = compute_b(d).b;
    // Depth where A^n/n! drops below the reconstruction cutoff, A the total variation up to L.
    double A = ConvolutionProfiles(d, L, 1).abs_mass(), term = 1;
    int need = 0;
    while (term * A / (need + 1) >= 1e-12) term *= A / ++need;
    int n_max = std::max({static_cast<int>(n_max_estimate(c_.theta, L)), c_.n_report, need + 1});
    ConvolutionProfiles P(d, L, n_max);
    {
      std::ofstream os(path("appendix.csv"));
      write_convolution_csv(os, P, lxs, b, c_.n_report);
    }
    plot_stub("appendix", "x", {"I_n", "b_pow_n"});
    json j = report("appendix");
    j["theta"] = c_.theta;
    j["b"] = b;
    j["n_max"] = n_max;
    for (double lx : lxs) {
      auto r = reconstruct_N(P, lx, b);
      j["reconstruction"].push_back({{"log_x", lx}, {"N", r.N}, {"ebx", r.ebx}, {"rel_gap", r.rel_gap}, {"terms", r.terms},
                                     {"tail_bound", r.tail_bound}});
      out_ << "log x = " << lx << ": N = " << r.N << ", |N - bx|/x = " << r.rel_gap << "\n";
    }
    return finish(j, "appendix.json");
  }

  int verify_all() {
    acceptance::Options o;
    o.threads = c_.threads;
    if (!c_.quick) o.mean_seeds = 1000;
    json j = report("verify-all");
    j["quick"] = c_.quick;
    int passed = 0;
    for (const auto& run : acceptance::all()) {
      auto r = run(o);
      out_ << acceptance::line(r) << "\n" << std::flush;
      j["criteria"].push_back(acceptance::to_json(r));
      if (r.pass) {
        ++passed;
      } else {
        failure("verify-all", "criterion " + std::to_string(r.id) + " (" + r.name + "): " + r.summary);
      }
    }
    out_ << passed << "/11 criteria passed\n";
    return finish(j, "verify.json");
  }

 private:
  RunConfig c_;
  std::ostream& out_;
  std::ostream& err_;
  json failures_ = json::array();

  std::string path(const std::string& name) const { return (std::filesystem::path(c_.out) / name).string(); }
  std::string manifest_path() const { return c_.sys.empty() ? path("system.manifest") : c_.sys; }

  static std::string manifest_text(const ContinuousPrimeSystem& sys) {
    std::ostringstream os;
    write_manifest(os, sys);
    return os.str();
  }

  ContinuousPrimeSystem load() const {
    std::ifstream is(manifest_path());
    if (!is) fail(ErrorKind::InvalidArgument, "cannot open manifest " + manifest_path() + " (run build first)");
    return read_manifest(is);
  }

  int check_k(const ContinuousPrimeSystem& sys) const {
    if (c_.k < 0 || c_.k >= sys.K) fail(ErrorKind::InvalidArgument, "--k out of range for this manifest");
    return c_.k;
  }

  std::pair<int, int> m_range(const SaddleProblem& P) const {
    if (c_.m_range == "auto") return {-P.m_max(), P.m_max()};
    auto colon = c_.m_range.find(':');
    try {
      if (colon == std::string::npos) {
        int m = std::stoi(c_.m_range);
        return {m, m};
      }
      return {std::stoi(c_.m_range.substr(0, colon)), std::stoi(c_.m_range.substr(colon + 1))};
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidArgument, "--m-range takes auto, m or lo:hi");
    }
  }

  static json report(const std::string& command) { return {{"schema", "1"}, {"command", command}}; }

  void failure(const std::string& where, const std::string& what) { failures_.push_back({{"command", where}, {"check", what}}); }

  void plot_stub(const std::string& stem, const std::string& x, const std::vector<std::string>& ys) const {
    std::ofstream os(path("plot_" + stem + ".py"));
    os << "import csv\nimport matplotlib.pyplot as plt\n\n"
       << "rows = list(csv.DictReader(open('" << stem << ".csv')))\n";
    for (const auto& y : ys)
      os << "plt.plot([float(r['" << x << "']) for r in rows], [float(r['" << y << "']) for r in rows], label='" << y << "')\n";
    os << "plt.xlabel('" << x << "')\nplt.legend()\nplt.savefig('" << stem << ".png')\n";
  }

  int finish(json j, const std::string& file) {
    j["pass"] = failures_.empty();
    j["failures"] = failures_;
    std::ofstream(path(file)) << dump17(j);
    if (failures_.empty()) return 0;
    err_ << dump17({{"schema", "1"}, {"status", "fail"}, {"report", path(file)}, {"failures", failures_}});
    return 2;
  }
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig c;
  CLI::App app{"Beurling number system laboratory"};
  app.require_subcommand(1, 1);
  app.set_config("--config", "", "flat key = value file with [subcommand] sections");
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);

  auto with_sys = [&](CLI::App* s) { s->add_option("--sys", c.sys, "system manifest (default <out>/system.manifest)"); };

  auto* b = app.add_subcommand("build", "construct the continuous system and write its manifest");
  b->add_option("--K", c.K)->check(CLI::Range(1, 8))->capture_default_str();
  b->add_option("--tau-floor", c.tau_floor)->capture_default_str();
  b->add_option("--bits", c.bits)->check(CLI::Range(128, 1 << 16))->capture_default_str();
  b->add_flag("--strict", c.strict, "strict construction");
  b->add_flag_callback("--relaxed", [&c] { c.strict = false; }, "relaxed construction (default)");

  auto* z = app.add_subcommand("zeta", "evaluate log zeta and certify its bounds");
  with_sys(z);
  z->add_option("--s", c.s_values, "points such as 1.5+100i");
  z->add_option("--certify", c.certify, "hl or strip");
  z->add_option("--k", c.k);

  auto* sd = app.add_subcommand("saddles", "saddle points and descent paths for term k");
  with_sys(sd);
  sd->add_option("--k", c.k)->capture_default_str();
  sd->add_option("--m-range", c.m_range, "auto, m or lo:hi")->capture_default_str();

  auto* p = app.add_subcommand("perron", "Perron integral on the vertical line or the composite contour");
  with_sys(p);
  p->add_option("--k", c.k)->capture_default_str();
  p->add_option("--mode", c.mode)->check(CLI::IsMember({"composite", "vertical"}))->capture_default_str();
  p->add_option("--kappa", c.kappa)->capture_default_str();
  p->add_option("--log-x", c.log_x, "vertical mode; default log x_k");

  auto* d = app.add_subcommand("discretize", "sample a discrete prime system and check its deviations");
  with_sys(d);
  d->add_option("--k", c.k)->capture_default_str();
  d->add_option("--seed", c.seed)->capture_default_str();
  d->add_option("--check", c.check, "subset of ABC")->capture_default_str();
  d->add_option("--seeds", c.seeds, "Monte-Carlo seeds starting at --seed")->check(CLI::PositiveNumber)->capture_default_str();

  auto* a = app.add_subcommand("appendix", "convolution powers of a deviation measure");
  a->add_option("--theta", c.theta)->check(CLI::Range(0.0, 0.999))->capture_default_str();
  a->add_option("--x-grid", c.x_grid, "lo:hi:n, values as eL or x")->capture_default_str();
  a->add_option("--n-report", c.n_report)->check(CLI::Range(0, 64))->capture_default_str();

  auto* v = app.add_subcommand("verify-all", "run the acceptance suite");
  v->add_flag("--quick", c.quick, "mean check on 200 seeds instead of 1000");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    std::filesystem::create_directories(c.out);
    Runner r(c, out, err);
    if (*b) return r.build();
    if (*z) return r.zeta();
    if (*sd) return r.saddles();
    if (*p) return r.perron();
    if (*d) return r.discretize();
    if (*a) return r.appendix();
    return r.verify_all();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
    err << dump17({{"schema", "1"}, {"status", "fail"}, {"error", to_string(e.kind())}, {"message", e.what()}});
    return 2;
  }
}

}  // namespace beurling::cli
