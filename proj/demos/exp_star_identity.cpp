// exp*(dP) on a log grid against N(x) = x, and the {2, 3} integers recovered from their primes.
#include <cmath>
#include <cstdio>

#include "beurling/measure/discrete.hpp"
#include "beurling/measure/grid.hpp"

using namespace beurling;

int main() {
  GridMeasure n = exp_star(GridMeasure::from_measure(Measure::dP(), 1e-4, 8.0));
  std::printf("%10s %16s %12s\n", "x", "N(x)", "rel err");
  for (double lx = 1; lx <= 8; lx += 1) {
    double x = std::exp(lx), N = n.cdf(x);
    std::printf("%10.3f %16.6f %12.3e\n", x, N, (N - x) / x);
  }

  GridMeasure e = exp_star(GridMeasure::from_measure(atomic_prime_measure({{2, 1}, {3, 1}}, 100), 1e-3, std::log(100.0)));
  std::printf("\n{2,3}-integers up to 100:");
  for (auto& [u, w] : e.atoms) std::printf(" %g", u);
  std::printf("\n");
}
