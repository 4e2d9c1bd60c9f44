#include "mrball/exec.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <atomic>
#include <mutex>

namespace mrball {

namespace {
int g_workers = 0;
}

void parallel_for_indexed(std::size_t n, ExecMode mode,
                          const std::function<void(std::size_t)>& fn) {
#ifdef _OPENMP
  if (mode == ExecMode::parallel && n > 1) {
    std::exception_ptr err;
    std::mutex err_mu;
    int threads = g_workers > 0 ? g_workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    return;
  }
#else
  (void)mode;
#endif
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

int effective_workers() {
#ifdef _OPENMP
  return g_workers > 0 ? g_workers : omp_get_max_threads();
#else
  return 1;
#endif
}

void set_workers(int n) { g_workers = n < 0 ? 0 : n; }

}  // namespace mrball
