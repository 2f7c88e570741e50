#pragma once

#include <cstddef>
#include <limits>
#include <utility>

#ifdef PAROBS_HAVE_OPENMP
#include <omp.h>
#endif

// Data-parallel inner loops. Every kernel has a serial path that is the
// reference semantics; the OpenMP path must produce identical results
// (maps are pointwise, reductions are order-independent min/max/count).
// Sum-type aggregates that feed reports are computed serially elsewhere.
namespace parobs::par {

inline bool& enabled() {
#ifdef PAROBS_HAVE_OPENMP
    static bool on = true;
#else
    static bool on = false;
#endif
    return on;
}

inline int max_threads() {
#ifdef PAROBS_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Loops below this size are not worth a parallel region.
inline constexpr std::ptrdiff_t kGrain = 2048;

template <class Fn>
inline void for_each(std::ptrdiff_t n, Fn&& fn) {
#ifdef PAROBS_HAVE_OPENMP
    if (enabled() && n >= kGrain) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

template <class Fn>
inline double max_abs(std::ptrdiff_t n, Fn&& fn) {
    double best = 0.0;
#ifdef PAROBS_HAVE_OPENMP
    if (enabled() && n >= kGrain) {
#pragma omp parallel for schedule(static) reduction(max : best)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            double v = fn(i);
            if (v < 0) v = -v;
            if (v > best) best = v;
        }
        return best;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double v = fn(i);
        if (v < 0) v = -v;
        if (v > best) best = v;
    }
    return best;
}

template <class Fn>
inline double min_of(std::ptrdiff_t n, Fn&& fn) {
    double best = std::numeric_limits<double>::infinity();
#ifdef PAROBS_HAVE_OPENMP
    if (enabled() && n >= kGrain) {
#pragma omp parallel for schedule(static) reduction(min : best)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double v = fn(i);
            if (v < best) best = v;
        }
        return best;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double v = fn(i);
        if (v < best) best = v;
    }
    return best;
}

template <class Fn>
inline double max_of(std::ptrdiff_t n, Fn&& fn) {
    double best = -std::numeric_limits<double>::infinity();
#ifdef PAROBS_HAVE_OPENMP
    if (enabled() && n >= kGrain) {
#pragma omp parallel for schedule(static) reduction(max : best)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double v = fn(i);
            if (v > best) best = v;
        }
        return best;
    }
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double v = fn(i);
        if (v > best) best = v;
    }
    return best;
}

} // namespace parobs::par
