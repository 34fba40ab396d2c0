#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pompkit {

enum class Execution { serial, openmp };

inline int max_workers()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// fn(i) for i in [0, n). Iterations must write disjoint outputs. The first
/// exception thrown by any iteration is rethrown after the loop.
template <class Fn>
void parallel_for(std::size_t n, Execution exec, int workers, Fn&& fn)
{
    if (exec == Execution::serial || workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
#ifdef _OPENMP
    std::exception_ptr error;
    std::mutex guard;
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        }
        catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!error) {
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
#else
    for (std::size_t i = 0; i < n; ++i) {
        fn(i);
    }
#endif
}

} // namespace pompkit
