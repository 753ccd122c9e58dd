#include "locsched/kernels.hpp"

#include <omp.h>

#include <climits>
#include <exception>

namespace locsched {

void for_each_index_omp(int n, const std::function<void(int)>& fn) {
  std::exception_ptr first;
  int first_index = INT_MAX;
#pragma omp parallel for schedule(dynamic, 16)
  for (int k = 0; k < n; ++k) {
    try {
      fn(k);
    } catch (...) {
#pragma omp critical(locsched_first_error)
      {
        if (k < first_index) {
          first_index = k;
          first = std::current_exception();
        }
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

void set_thread_count(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace locsched
