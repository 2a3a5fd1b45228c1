#pragma once

#include <cstddef>
#include <span>

namespace hstv::parallel {

/// Worker count used by the OpenMP kernels. Honours the HTV_THREADS
/// environment variable as an upper bound on omp_get_max_threads().
int max_threads();

/// Overrides the worker count for subsequent kernel calls (0 restores the
/// environment-derived default). Used by tests to compare thread counts.
void set_threads(int n);

/// Pairwise (tree) summation with a fixed split rule. The result depends only
/// on the order of `values`, never on the thread count.
double pairwise_sum(std::span<const double> values);

/// Runs body(i) for i in [0, n) on the kernel thread pool.
template <class Body>
void for_each_index(std::size_t n, Body&& body)
{
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (long long i = 0; i < count; ++i)
        body(static_cast<std::size_t>(i));
}

} // namespace hstv::parallel
