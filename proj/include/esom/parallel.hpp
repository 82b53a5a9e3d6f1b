#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace esom {

// Runs fn(0..n-1). jobs <= 1 runs the plain serial loop; otherwise iterations
// are distributed over an OpenMP team. Workers must only touch disjoint state
// (callers preallocate per-index output slots), so results are identical for
// any job count. If iterations throw, the lowest-index exception is rethrown
// regardless of thread timing.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
#ifdef _OPENMP
    if (jobs > 1 && n > 1) {
        std::vector<std::exception_ptr> errors(n);
        bool failed = false;
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            try {
                fn(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
#pragma omp atomic write
                failed = true;
            }
        }
        if (failed)
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        return;
    }
#else
    (void)jobs;
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

inline int hardware_jobs() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace esom
