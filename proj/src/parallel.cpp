#include <hstv/parallel.hpp>

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace hstv::parallel {

namespace {

std::atomic<int> g_override{0};

int env_cap()
{
    const char* raw = std::getenv("HTV_THREADS");
    if (raw == nullptr)
        return 0;
    try {
        const int v = std::stoi(raw);
        return v > 0 ? v : 0;
    } catch (...) {
        return 0;
    }
}

} // namespace

int max_threads()
{
    if (const int o = g_override.load(); o > 0)
        return o;
    static const int cap = env_cap();
    const int hw = omp_get_max_threads();
    return cap > 0 && cap < hw ? cap : hw;
}

void set_threads(int n) { g_override.store(n > 0 ? n : 0); }

double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t leaf = 32;
    if (values.size() <= leaf) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

} // namespace hstv::parallel
