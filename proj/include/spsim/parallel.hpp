#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace spsim {

/// Number of workers used for per-particle loops. Reads SPSIM_NUM_THREADS
/// on first use; defaults to the OpenMP runtime's choice.
int worker_count();
void set_worker_count(int workers);

/// Runs fn(i) for i in [0, n). Iterations must only touch disjoint slots.
/// The exception from the lowest failing index is rethrown after the loop.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr failure;
  std::size_t failed_at = n;
  std::mutex guard;
  const auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard lock(guard);
      if (i < failed_at) {
        failed_at = i;
        failure = std::current_exception();
      }
    }
  };
#ifdef _OPENMP
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::int64_t i = 0; i < count; ++i) run(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) run(i);
#endif
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spsim
