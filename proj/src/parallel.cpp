#include "qprl/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace qprl {

namespace {
int thread_cap() {
  if (const char* env = std::getenv("QPRL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) return cap;
  }
  return 0;
}
}  // namespace

int worker_count() {
  const int cap = thread_cap();
  const int max_threads = omp_get_max_threads();
  return (cap > 0 && cap < max_threads) ? cap : max_threads;
}

void configure_threads() {
  const int cap = thread_cap();
  if (cap > 0) omp_set_num_threads(cap);
}

}  // namespace qprl
