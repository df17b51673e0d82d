#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stopspa {

/// 0 means "all available hardware threads".
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs fn(i) for i in [0, n). With workers > 1 the loop is split statically
/// across OpenMP threads; fn must only write to per-index state. The first
/// exception thrown by any iteration is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

/// values[i] = fn(i), one call per replication.
template <class Fn>
std::vector<double> replicate(std::size_t reps, int workers, Fn&& fn) {
    std::vector<double> values(reps);
    parallel_for(reps, workers, [&](std::size_t i) { values[i] = fn(i); });
    return values;
}

/// Plain sequential loop; the reference replicate() is tested against.
template <class Fn>
std::vector<double> replicate_serial(std::size_t reps, Fn&& fn) {
    std::vector<double> values(reps);
    for (std::size_t i = 0; i < reps; ++i) values[i] = fn(i);
    return values;
}

struct SampleSummary {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error (sample std / sqrt(n)), summed in index order.
inline SampleSummary summarize(std::span<const double> values) {
    SampleSummary s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
    return s;
}

}  // namespace stopspa
