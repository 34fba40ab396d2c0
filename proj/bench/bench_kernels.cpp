// Serial reference vs OpenMP kernels on the toy SIR metapopulation.

#include "pompkit/particle_filter.hpp"
#include "pompkit/toy_models.hpp"

#include <benchmark/benchmark.h>

using namespace pompkit;

namespace {

TimeGrid weekly_grid(std::size_t n)
{
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = static_cast<double>(i + 1);
    }
    return TimeGrid{0.0, times, 1.0 / 7.0};
}

struct Fixture {
    SirModel model{SirConfig{4}};
    ParameterSet params = model.default_parameters();
    TimeGrid grid = weekly_grid(52);
    ObservationSeries data = simulate(model, params, grid, 1, 1, 1).front().observations;
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

void filter(benchmark::State& state, Execution exec, bool blocked)
{
    const auto& f = fixture();
    FilterOptions fo;
    fo.particles = static_cast<std::size_t>(state.range(0));
    fo.execution = exec;
    if (blocked) {
        fo.blocks = unit_blocks(f.model.units());
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(particle_filter(f.model, f.params, f.data, f.grid, fo).loglik);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(f.grid.size()));
}

void simulate_many(benchmark::State& state, int workers)
{
    const auto& f = fixture();
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(f.model, f.params, f.grid, static_cast<std::size_t>(state.range(0)), 2, workers));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK_CAPTURE(filter, serial, Execution::serial, false)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(filter, openmp, Execution::openmp, false)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(filter, serial_blocks, Execution::serial, true)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(filter, openmp_blocks, Execution::openmp, true)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(simulate_many, serial, 1)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(simulate_many, openmp, 0)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
