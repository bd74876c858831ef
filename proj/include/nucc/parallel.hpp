#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <vector>

#ifdef NUCC_HAVE_OPENMP
#include <omp.h>
#endif

namespace nucc::par {

// NUCC_THREADS overrides the OpenMP default; builds without OpenMP run serial
inline int thread_count() {
  if (const char* env = std::getenv("NUCC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
#ifdef NUCC_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Runs fn(0..n-1) with each index writing only its own result slot, so the
// output is identical for any thread count. If several indices throw, the
// lowest index wins, matching what a serial loop would have surfaced first.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
#ifdef NUCC_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
#endif
  for (long i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errs[static_cast<size_t>(i)] = std::current_exception();
    }
  }
  for (long i = 0; i < n; ++i)
    if (errs[static_cast<size_t>(i)])
      std::rethrow_exception(errs[static_cast<size_t>(i)]);
}

}  // namespace nucc::par
