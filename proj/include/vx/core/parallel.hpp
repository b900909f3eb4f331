#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vx {

namespace detail {
inline int& thread_setting() {
    static int n = 0;
    return n;
}
} // namespace detail

/// Number of worker threads for batch operations. 0 means the OpenMP
/// default; 1 forces single-threaded execution.
inline void set_num_threads(int n) { detail::thread_setting() = n; }

inline int num_threads() {
#ifdef _OPENMP
    return detail::thread_setting() > 0 ? detail::thread_setting() : omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs fn(i) for i in [0, n). Iterations must write disjoint outputs.
template <class F>
inline void parallel_for(size_t n, F&& fn) {
#ifdef _OPENMP
    int nt = num_threads();
    if (nt > 1 && n > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
        for (long long i = 0; i < static_cast<long long>(n); ++i) fn(static_cast<size_t>(i));
        return;
    }
#endif
    for (size_t i = 0; i < n; ++i) fn(i);
}

} // namespace vx
