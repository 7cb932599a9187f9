#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "beurling/measure/measure.hpp"
#include "beurling/numeric/errors.hpp"

namespace beurling {

// Mass on the log grid: cells [jh, (j+1)h) in v = log u, uniform in v inside a cell,
// plus exact atoms keyed by position u (products of integers stay exact).
struct GridMeasure {
  double h = 1e-4;
  double log_max = 0;
  std::vector<double> cells;
  std::map<double, double> atoms;
  bool is_signed = false;

  static size_t cell_count(double h, double log_max) {
    return static_cast<size_t>(std::ceil(log_max / h - 1e-9));
  }

  static GridMeasure empty(double h, double log_max) {
    if (!(h > 0) || !(log_max > 0)) fail(ErrorKind::InvalidArgument, "grid h and log_max must be positive");
    GridMeasure g;
    g.h = h;
    g.log_max = log_max;
    g.cells.assign(cell_count(h, log_max), 0.0);
    return g;
  }

  static GridMeasure delta_one(double h, double log_max) {
    GridMeasure g = empty(h, log_max);
    g.atoms[1.0] = 1.0;
    return g;
  }

  double u_max() const { return std::exp(log_max); }
  bool in_range(double u) const { return std::log(u) <= log_max * (1 + 1e-14); }

  // Bins a measure: atoms stay atoms, densities become cell masses (5-point Gauss per cell piece).
  static GridMeasure from_measure(const Measure& mu, double h, double log_max) {
    GridMeasure g = empty(h, log_max);
    g.is_signed = mu.is_signed;
    for (auto& [u, w] : mu.atoms)
      if (g.in_range(u)) g.atoms[u] += w;
    static constexpr double x5[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
    static constexpr double w5[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
    const size_t n = g.cells.size();
    for (const auto& seg : mu.segments) {
      if (seg.la >= log_max) continue;
      size_t j0 = static_cast<size_t>(std::floor(seg.la / h));
      bool use_antiderivative =
          seg.kind == DensityKind::GridCells ||
          (seg.kind == DensityKind::SineChunkDerivative && seg.chunk.tau * h > 0.5);
      for (size_t j = j0; j < n; ++j) {
        double c0 = j * h, c1 = (j + 1) * h;
        double a = std::max(c0, seg.la), b = std::min({c1, seg.lb, log_max});
        if (!(b > a)) {
          if (c0 >= seg.lb) break;
          continue;
        }
        if (use_antiderivative) {
          g.cells[j] += seg.mass_to(b) - seg.mass_to(a);
        } else {
          double m = 0.5 * (a + b), r = 0.5 * (b - a), s = 0;
          for (int i = 0; i < 5; ++i) s += w5[i] * seg.density(m + r * x5[i]);
          g.cells[j] += s * r;
        }
      }
    }
    return g;
  }

  double total_mass() const {
    double s = 0;
    for (double c : cells) s += c;
    for (auto& [u, w] : atoms) s += w;
    return s;
  }

  double abs_mass() const {
    double s = 0;
    for (double c : cells) s += std::fabs(c);
    for (auto& [u, w] : atoms) s += std::fabs(w);
    return s;
  }

  // ∫_{1⁻}^{x} dμ with the partial cell taken uniform in log.
  double cdf(double x) const {
    if (x < 1) return 0;
    double c = 0;
    for (auto& [u, w] : atoms) {
      if (u > x) break;
      c += w;
    }
    double v = std::min(std::log(x), log_max);
    double q = v / h;
    size_t full = std::min(cells.size(), static_cast<size_t>(std::floor(q)));
    for (size_t j = 0; j < full; ++j) c += cells[j];
    if (full < cells.size()) c += cells[full] * (q - static_cast<double>(full));
    return c;
  }

  // Cumulative masses at grid nodes: out[j] = μ([1, e^{jh}]), j = 0..n.
  std::vector<double> cumulative_nodes() const {
    std::vector<double> out(cells.size() + 1, 0.0);
    for (size_t j = 0; j < cells.size(); ++j) out[j + 1] = out[j] + cells[j];
    for (auto& [u, w] : atoms) {
      double q = std::log(u) / h;
      size_t first = static_cast<size_t>(std::max(0.0, std::ceil(q - 1e-9)));
      for (size_t j = first; j < out.size(); ++j) out[j] += w;
    }
    return out;
  }

  // ∫_1^x μ([1,u]) du.
  double primitive(double x) const {
    if (x <= 1) return 0;
    double s = 0;
    for (auto& [u, w] : atoms) {
      if (u > x) break;
      s += w * (x - u);
    }
    double v = std::min(std::log(x), log_max);
    for (size_t j = 0; j < cells.size(); ++j) {
      double a = j * h;
      if (a >= v) break;
      double b = std::min(a + h, v);
      // mass density c/h in v; ∫_a^b (x − e^w) dw.
      s += cells[j] / h * (x * (b - a) - (std::exp(b) - std::exp(a)));
    }
    return s;
  }

  // ∫ u^{−s} dμ with exact cell averages of e^{−sv}.
  cplx mellin(cplx s) const {
    cplx r = 0;
    for (auto& [u, w] : atoms) r += w * std::exp(-s * std::log(u));
    cplx sh = s * h;
    cplx avg = std::abs(sh) < 1e-8 ? cplx(1) - sh / 2.0 : -cexpm1(-sh) / sh;
    cplx step = std::exp(-sh), cur = 1;
    for (size_t j = 0; j < cells.size(); ++j) {
      if (j % 1024 == 0) cur = std::exp(-s * (j * h));
      r += cells[j] * cur * avg;
      cur *= step;
    }
    return r;
  }

  GridMeasure& operator+=(const GridMeasure& o) {
    check_compatible(o);
    for (size_t j = 0; j < cells.size(); ++j) cells[j] += o.cells[j];
    for (auto& [u, w] : o.atoms) atoms[u] += w;
    is_signed = is_signed || o.is_signed;
    return *this;
  }

  GridMeasure scaled(double c) const {
    GridMeasure g = *this;
    for (double& x : g.cells) x *= c;
    for (auto& [u, w] : g.atoms) w *= c;
    if (c < 0) g.is_signed = true;
    return g;
  }

  void check_compatible(const GridMeasure& o) const {
    if (std::fabs(h - o.h) > 1e-15 * h || std::fabs(log_max - o.log_max) > 1e-12 * log_max ||
        cells.size() != o.cells.size())
      fail(ErrorKind::GridMismatch, "grids differ in h or log_max");
  }
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Linear convolution of two real sequences via FFTW, with the cached spectrum of the right operand.
// Both operands are tilted by e^{−θ j} before transforming, which commutes with convolution and keeps
// the small cells near u = 1 above the FFT round-off floor set by the largest cells.
class FftConvolver {
 public:
  FftConvolver(const std::vector<double>& right, size_t out_len, double theta_per_cell = 0)
      : out_len_(out_len), theta_(theta_per_cell) {
    size_t need = right.size() + out_len + 1;
    n_ = std::bit_ceil(need);
    nc_ = n_ / 2 + 1;
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(nc_);
    right_spec_ = fftw_alloc_complex(nc_);
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec_, FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec_, real_, FFTW_ESTIMATE);
    }
    std::fill(real_, real_ + n_, 0.0);
    std::copy(right.begin(), right.end(), real_);
    tilt(real_, right.size(), -theta_);
    fftw_execute(fwd_);
    std::memcpy(right_spec_, spec_, sizeof(fftw_complex) * nc_);
  }
  ~FftConvolver() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(fwd_);
      fftw_destroy_plan(inv_);
    }
    fftw_free(real_);
    fftw_free(spec_);
    fftw_free(right_spec_);
  }
  FftConvolver(const FftConvolver&) = delete;
  FftConvolver& operator=(const FftConvolver&) = delete;

  // out[k] = Σ_{i+j=k} left[i]·right[j] for k < out_len.
  std::vector<double> convolve(const std::vector<double>& left) {
    std::fill(real_, real_ + n_, 0.0);
    size_t nl = std::min(left.size(), out_len_);
    std::copy(left.begin(), left.begin() + nl, real_);
    tilt(real_, nl, -theta_);
    fftw_execute(fwd_);
    for (size_t k = 0; k < nc_; ++k) {
      double ar = spec_[k][0], ai = spec_[k][1], br = right_spec_[k][0], bi = right_spec_[k][1];
      spec_[k][0] = ar * br - ai * bi;
      spec_[k][1] = ar * bi + ai * br;
    }
    fftw_execute(inv_);
    std::vector<double> out(out_len_);
    double inv_n = 1.0 / static_cast<double>(n_);
    for (size_t k = 0; k < out_len_; ++k) out[k] = real_[k] * inv_n;
    tilt(out.data(), out_len_, theta_);
    return out;
  }

  double theta() const { return theta_; }

 private:
  static void tilt(double* v, size_t n, double th) {
    if (th == 0) return;
    double cur = 1, step = std::exp(th);
    for (size_t j = 0; j < n; ++j) {
      if (j % 1024 == 0) cur = std::exp(th * static_cast<double>(j));
      v[j] *= cur;
      cur *= step;
    }
  }

  size_t out_len_;
  double theta_;
  size_t n_, nc_;
  double* real_;
  fftw_complex* spec_;
  fftw_complex* right_spec_;
  fftw_plan fwd_, inv_;
};

// Adds mass·(cells shifted by log a) with the fractional part split between neighbours.
inline void add_shifted(std::vector<double>& out, const std::vector<double>& cells, double shift_over_h, double w) {
  double q = std::floor(shift_over_h);
  double f = shift_over_h - q;
  long iq = static_cast<long>(q);
  long n = static_cast<long>(out.size());
  for (long j = 0; j < static_cast<long>(cells.size()); ++j) {
    long k = j + iq;
    if (k >= n) break;
    double m = cells[j] * w;
    if (m == 0) continue;
    if (k >= 0) out[k] += m * (1 - f);
    if (k + 1 < n && k + 1 >= 0) out[k + 1] += m * f;
  }
}

// cell×cell: uniform ⊕ uniform on [0,h) is triangular on [0,2h): half the mass lands in each cell.
inline void add_cell_products(std::vector<double>& out, const std::vector<double>& raw) {
  size_t n = out.size();
  for (size_t k = 0; k < n && k < raw.size(); ++k) {
    out[k] += 0.5 * raw[k];
    if (k + 1 < n) out[k + 1] += 0.5 * raw[k];
  }
}

inline bool any_nonzero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0) return true;
  return false;
}

}  // namespace detail

// Multiplicative convolution with a fixed right factor; reuses the right operand's spectrum.
class ConvolutionOperator {
 public:
  explicit ConvolutionOperator(const GridMeasure& right) : right_(right) {
    if (detail::any_nonzero(right.cells))
      fft_ = std::make_unique<detail::FftConvolver>(right.cells, right.cells.size(), growth_rate(right) * right.h);
  }

  GridMeasure apply(const GridMeasure& left) const {
    right_.check_compatible(left);
    GridMeasure out = GridMeasure::empty(left.h, left.log_max);
    out.is_signed = left.is_signed || right_.is_signed;
    const double umax = std::exp(left.log_max) * (1 + 1e-13);
    for (auto& [a, wa] : left.atoms)
      for (auto& [b, wb] : right_.atoms) {
        double p = a * b;
        if (p > umax) break;
        out.atoms[p] += wa * wb;
      }
    for (auto& [a, wa] : left.atoms)
      if (detail::any_nonzero(right_.cells)) detail::add_shifted(out.cells, right_.cells, std::log(a) / left.h, wa);
    for (auto& [b, wb] : right_.atoms)
      if (detail::any_nonzero(left.cells)) detail::add_shifted(out.cells, left.cells, std::log(b) / left.h, wb);
    if (fft_ && detail::any_nonzero(left.cells)) detail::add_cell_products(out.cells, fft_->convolve(left.cells));
    return out;
  }

 private:
  const GridMeasure& right_;
  std::unique_ptr<detail::FftConvolver> fft_;

  // Exponential growth rate of |cells| per unit log, from the peaks of the first and last tenths.
  static double growth_rate(const GridMeasure& g) {
    size_t n = g.cells.size(), w = std::max<size_t>(1, n / 10);
    double a = 0, b = 0;
    for (size_t j = 0; j < w; ++j) a = std::max(a, std::fabs(g.cells[j]));
    for (size_t j = n - w; j < n; ++j) b = std::max(b, std::fabs(g.cells[j]));
    if (a == 0 || b == 0 || g.log_max <= 0) return 0;
    double th = std::log(b / a) / (g.log_max * 0.9);
    return std::clamp(th, 0.0, std::min(2.0, 600.0 / g.log_max));
  }
};

inline GridMeasure mconvolve(const GridMeasure& mu, const GridMeasure& nu) {
  mu.check_compatible(nu);
  ConvolutionOperator op(nu);
  return op.apply(mu);
}

struct ExpStarReport {
  int terms = 0;
  double tail_bound = 0;
  double chernoff_s = 0;
};

// Chernoff bound on Σ_{n>N} |μ|^{*n}([1, e^L))/n!: e^{sL} Σ_{n>N} m(s)^n/n!, m(s) = ∫ u^{−s} d|μ|.
class ExpStarTail {
 public:
  explicit ExpStarTail(const GridMeasure& mu) : L_(mu.log_max) {
    for (int i = 0; i <= 120; ++i) {
      double s = std::exp(-3.0 + i * 0.1);
      double m = 0;
      for (auto& [u, w] : mu.atoms) m += std::fabs(w) * std::exp(-s * std::log(u));
      double step = std::exp(-s * mu.h), cur = 1;
      for (size_t j = 0; j < mu.cells.size(); ++j) {
        if (j % 1024 == 0) cur = std::exp(-s * (j * mu.h));
        m += std::fabs(mu.cells[j]) * cur;
        cur *= step;
      }
      table_.push_back({s, m});
    }
  }

  double bound(int N, double* best_s = nullptr) const {
    double best = INFINITY;
    for (auto [s, m] : table_) {
      if (m >= N + 2) continue;
      double lt = (N + 1) * std::log(std::max(m, 1e-300)) - std::lgamma(N + 2.0) - std::log1p(-m / (N + 2));
      double b = s * L_ + lt;
      if (b < best) {
        best = b;
        if (best_s) *best_s = s;
      }
    }
    return std::exp(best);
  }

 private:
  double L_;
  std::vector<std::pair<double, double>> table_;
};

inline double exp_star_tail_bound(const GridMeasure& mu, int N, double* best_s = nullptr) {
  return ExpStarTail(mu).bound(N, best_s);
}

// δ_1 + Σ_{n ≤ N} μ^{*n}/n!; N = 0 selects the smallest N with Chernoff tail ≤ 1e−12·mass.
inline GridMeasure exp_star(const GridMeasure& mu, int n_max = 0, ExpStarReport* report = nullptr) {
  auto it = mu.atoms.find(1.0);
  if (it != mu.atoms.end() && it->second != 0) fail(ErrorKind::MassAtOne, "μ({1}) ≠ 0");
  GridMeasure result = GridMeasure::delta_one(mu.h, mu.log_max);
  result.is_signed = mu.is_signed;
  if (mu.abs_mass() == 0) {
    if (report) *report = {};
    return result;
  }
  ConvolutionOperator op(mu);
  ExpStarTail tb(mu);
  GridMeasure term = result;
  const int cap = n_max > 0 ? n_max : 100000;
  int n = 1;
  double tail = INFINITY, s_used = 0;
  for (; n <= cap; ++n) {
    term = op.apply(term).scaled(1.0 / n);
    result += term;
    if (n_max == 0) {
      tail = tb.bound(n, &s_used);
      if (tail <= 1e-12 * std::max(1.0, result.abs_mass())) break;
    }
  }
  if (n_max > 0) tail = tb.bound(n_max, &s_used);
  if (report) *report = {std::min(n, cap), tail, s_used};
  return result;
}

// BGM1: magic, h, log_max (f64 LE), cell count (u64 LE), masses (f64 LE). Atoms fold into their cells.
inline void write_bgm1(std::ostream& os, const GridMeasure& g) {
  static_assert(std::endian::native == std::endian::little, "BGM1 writer assumes little-endian host");
  std::vector<double> cells = g.cells;
  for (auto& [u, w] : g.atoms) {
    size_t j = std::min(cells.size() - 1, static_cast<size_t>(std::floor(std::log(u) / g.h)));
    cells[j] += w;
  }
  os.write("BGM1", 4);
  uint64_t n = cells.size();
  os.write(reinterpret_cast<const char*>(&g.h), 8);
  os.write(reinterpret_cast<const char*>(&g.log_max), 8);
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(cells.data()), static_cast<std::streamsize>(8 * n));
}

inline GridMeasure read_bgm1(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "BGM1", 4) != 0) fail(ErrorKind::InvalidArgument, "not a BGM1 stream");
  GridMeasure g;
  uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&g.h), 8);
  is.read(reinterpret_cast<char*>(&g.log_max), 8);
  is.read(reinterpret_cast<char*>(&n), 8);
  if (!is || n > (uint64_t(1) << 34)) fail(ErrorKind::InvalidArgument, "bad BGM1 header");
  g.cells.resize(n);
  is.read(reinterpret_cast<char*>(g.cells.data()), static_cast<std::streamsize>(8 * n));
  if (!is) fail(ErrorKind::InvalidArgument, "truncated BGM1 stream");
  for (double c : g.cells)
    if (c < 0) g.is_signed = true;
  return g;
}

// CSV with columns x, cdf at every `stride`-th grid node.
inline void write_cdf_csv(std::ostream& os, const GridMeasure& g, size_t stride = 1) {
  os << "x,cdf\n";
  os.precision(17);
  auto c = g.cumulative_nodes();
  for (size_t j = 0; j < c.size(); j += std::max<size_t>(1, stride)) os << std::exp(j * g.h) << "," << c[j] << "\n";
}

}  // namespace beurling
