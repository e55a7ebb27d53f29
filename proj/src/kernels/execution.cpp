#include "massive/execution.hpp"

#include <omp.h>

namespace massive {

void set_worker_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int worker_count() { return omp_get_max_threads(); }

}  // namespace massive
