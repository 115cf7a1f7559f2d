#pragma once

#include <cstdint>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace markovcov {

/// Execution policy for the data-parallel kernels. Every parallel code path
/// has a serial twin producing bit-identical results (work items draw from
/// independent derived-seed streams and write to disjoint slots).
enum class Exec { serial, parallel };

template <class F>
void parallel_for(std::int64_t count, Exec exec, F&& body) {
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::int64_t i = 0; i < count; ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) body(i);
  }
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace markovcov
