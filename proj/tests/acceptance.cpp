#include <cstdio>
#include <thread>

#include "beurling/cli/acceptance.hpp"

int main() {
  beurling::acceptance::Options opt;
  opt.threads = std::max(1u, std::thread::hardware_concurrency());
  int failed = 0;
  for (const auto& run : beurling::acceptance::all()) {
    auto c = run(opt);
    std::printf("%s\n", beurling::acceptance::line(c).c_str());
    std::fflush(stdout);
    if (!c.pass) ++failed;
  }
  std::printf("%d/11 criteria passed\n", 11 - failed);
  return failed ? 1 : 0;
}
