// Timing harness comparing the parallel kernels against their serial
// reference implementations. Grows alongside the kernels; transition
// evaluation is the placeholder workload until the sweep kernels land.

#include <chrono>
#include <cstdio>

#include "nucc/catalog.hpp"
#include "nucc/propagator.hpp"

int main() {
  using clock = std::chrono::steady_clock;
  nucc::Propagator prop(nucc::make_catalog_system("lti_scalar"));
  auto start = clock::now();
  double acc = 0;
  for (int i = 0; i < 200; ++i)
    acc += prop.log_norm_transition(0.0, 0.01 * i);
  auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                clock::now() - start)
                .count();
  std::printf("log_norm_transition x200: %lld us (checksum %.3f)\n",
              static_cast<long long>(us), acc);
  return 0;
}
