#include "spsim/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace spsim {

namespace {

int initial_worker_count() {
  if (const char* env = std::getenv("SPSIM_NUM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::atomic<int>& workers() {
  static std::atomic<int> count{initial_worker_count()};
  return count;
}

}  // namespace

int worker_count() { return workers().load(std::memory_order_relaxed); }

void set_worker_count(int n) { workers().store(n > 0 ? n : 1, std::memory_order_relaxed); }

}  // namespace spsim
