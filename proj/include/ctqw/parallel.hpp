#pragma once

// Thin OpenMP shim so every translation unit builds with or without -fopenmp.
// Kernels come in pairs: an OpenMP version used by default and a serial
// reference used in tests and in the benchmark tool.

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_num_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
inline void omp_set_num_threads(int) {}
#endif

namespace ctqw {

// Bounded worker pool: 0 keeps the runtime default.
inline void set_max_threads(int jobs) {
    if (jobs > 0) omp_set_num_threads(jobs);
}

inline int max_threads() { return omp_get_max_threads(); }

} // namespace ctqw
