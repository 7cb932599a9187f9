#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "beurling/numeric/errors.hpp"

namespace beurling {

// Generalized integers up to x_max from (p, multiplicity) pairs, by lattice walk over exponents.
struct DiscreteIntegers {
  double x_max = 0;
  std::vector<std::pair<double, double>> values;  // sorted (n, weight)
  std::vector<std::pair<double, int>> primes;

  double N(double x) const {
    double c = 0;
    for (auto& [n, w] : values) {
      if (n > x) break;
      c += w;
    }
    return c;
  }

  // Π(x) = Σ_p m_p Σ_{k: p^k ≤ x} 1/k.
  double Pi(double x) const {
    double c = 0;
    for (auto [p, m] : primes) {
      double q = p;
      for (int k = 1; q <= x * (1 + 1e-15); ++k, q *= p) c += static_cast<double>(m) / k;
    }
    return c;
  }

  // ∫_1^x N(u) du.
  double primitive(double x) const {
    double c = 0;
    for (auto& [n, w] : values) {
      if (n > x) break;
      c += w * (x - n);
    }
    return c;
  }
};

inline double binomial_weight(int k, int m) {
  // C(k+m−1, k): number of ways a prime of multiplicity m contributes p^k.
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (m - 1 + i) / i;
  return r;
}

inline DiscreteIntegers discrete_integers(std::vector<std::pair<double, int>> primes, double x_max,
                                          size_t cap = 50'000'000) {
  for (auto& [p, m] : primes)
    if (!(p > 1) || m < 1) fail(ErrorKind::InvalidArgument, "primes must exceed 1 with multiplicity ≥ 1");
  std::sort(primes.begin(), primes.end());
  DiscreteIntegers out;
  out.x_max = x_max;
  out.primes = primes;
  std::map<double, double> acc;
  const double lim = x_max * (1 + 1e-15);
  // Depth-first over prime index; each level multiplies by p^k, k ≥ 0.
  struct Frame {
    size_t idx;
    double value;
    double weight;
  };
  std::vector<Frame> stack{{0, 1.0, 1.0}};
  size_t produced = 0;
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.idx == primes.size()) {
      acc[f.value] += f.weight;
      if (++produced > cap) fail(ErrorKind::Overflow, "integer count exceeds cap");
      continue;
    }
    auto [p, m] = primes[f.idx];
    if (f.value * p > lim) {
      // No further primes fit either (sorted), so this value is final.
      acc[f.value] += f.weight;
      if (++produced > cap) fail(ErrorKind::Overflow, "integer count exceeds cap");
      continue;
    }
    double v = f.value;
    for (int k = 0; v <= lim; ++k, v *= p) stack.push_back({f.idx + 1, v, f.weight * binomial_weight(k, m)});
  }
  out.values.assign(acc.begin(), acc.end());
  return out;
}

}  // namespace beurling
