// Parallel kernels against their serial references.

#include <hstv/approx.hpp>
#include <hstv/field.hpp>
#include <hstv/htv.hpp>
#include <hstv/parallel.hpp>

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>

namespace {

using namespace hstv;

const CpwlFunction& pipeline_interpolant()
{
    static const CpwlFunction g = [] {
        const auto f = make_rotated_quadratic(2, 1, std::atan(0.5));
        const MeshPlan plan = plan_mesh(build_frames(*f, 1), 1, 5);
        return interpolate(*f, std::make_shared<const Triangulation>(assemble_global(plan)));
    }();
    return g;
}

const FieldPtr& bump()
{
    static const FieldPtr f = make_gaussian_bump(0.2, {0.5, 0.5});
    return f;
}

const GridSample& noisy_grid()
{
    static const GridSample u = [] {
        GridSample s({0, 0}, 1.0 / 256, 256, 256);
        for (std::size_t i = 0; i < s.values.size(); ++i)
            s.values[i] = std::sin(0.37 * static_cast<double>(i));
        return s;
    }();
    return u;
}

void threads_from(benchmark::State& state) { parallel::set_threads(static_cast<int>(state.range(0))); }

void BM_HtvCpwl(benchmark::State& state)
{
    threads_from(state);
    const CpwlFunction& g = pipeline_interpolant();
    for (auto _ : state)
        benchmark::DoNotOptimize(htv_cpwl(g).total);
    state.counters["edges"] = static_cast<double>(g.mesh().interior_edge_count());
}

void BM_HtvCpwlSerial(benchmark::State& state)
{
    const CpwlFunction& g = pipeline_interpolant();
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::htv_cpwl(g).total);
}

void BM_HtvQuadrature(benchmark::State& state)
{
    threads_from(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(htv_quadrature(*bump(), SchattenP::one(), 1024));
}

void BM_HtvQuadratureSerial(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::htv_quadrature(*bump(), SchattenP::one(), 1024));
}

void BM_Mollify(benchmark::State& state)
{
    threads_from(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(mollify(noisy_grid(), 4.0 / 256).values.data());
}

void BM_MollifySerial(benchmark::State& state)
{
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::mollify(noisy_grid(), 4.0 / 256).values.data());
}

void BM_SupError(benchmark::State& state)
{
    threads_from(state);
    const auto f = make_rotated_quadratic(2, 1, std::atan(0.5));
    for (auto _ : state)
        benchmark::DoNotOptimize(sup_error(*f, pipeline_interpolant()));
}

void BM_SupErrorSerial(benchmark::State& state)
{
    const auto f = make_rotated_quadratic(2, 1, std::atan(0.5));
    for (auto _ : state)
        benchmark::DoNotOptimize(reference::sup_error(*f, pipeline_interpolant()));
}

} // namespace

BENCHMARK(BM_HtvCpwlSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HtvCpwl)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_HtvQuadratureSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HtvQuadrature)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MollifySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Mollify)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SupErrorSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupError)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
