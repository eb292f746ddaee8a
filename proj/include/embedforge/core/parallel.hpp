#pragma once

#include <cstddef>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace embedforge {

// Hot kernels come in two variants: a serial reference and an OpenMP
// version. The reference is the ground truth the tests compare against; the
// parallel variants are written so every output element is produced by
// exactly one thread with the same inner-loop order, which keeps results
// bit-identical to the reference.
enum class ExecPolicy { serial, parallel };

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

template <typename Fn>
void parallel_for(ExecPolicy policy, std::size_t n, Fn&& fn) {
    if (policy == ExecPolicy::parallel) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
#endif
    }
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace embedforge
