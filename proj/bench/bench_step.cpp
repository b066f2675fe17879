#include "swarmgbp/sim.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace swarmgbp::sim;

namespace {

SimConfig discrete_world(std::size_t n)
{
    SimConfig c;
    c.mode = Mode::Discrete;
    c.n_robots = n;
    c.r_C = 12.0;
    c.sigma_p = {0.1};
    c.sigma_c = {0.125};
    c.sigma_t_scale = 12.5;
    return c;
}

SimConfig exploration_world(std::size_t n)
{
    SimConfig c;
    c.mode = Mode::Exploration;
    c.n_robots = n;
    c.r_C = 30.0;
    return c;
}

template <SimConfig (*Make)(std::size_t)>
void step(benchmark::State& state)
{
    const bool parallel = state.range(1) != 0;
    World w(Make(static_cast<std::size_t>(state.range(0))), 7);
    for (int t = 0; t < 5; ++t)
        w.step(parallel);
    for (auto _ : state)
        w.step(parallel);
    state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
    state.counters["robot_steps/s"] =
        benchmark::Counter(static_cast<double>(state.range(0)), benchmark::Counter::kIsIterationInvariantRate);
}

} // namespace

BENCHMARK(step<discrete_world>)
    ->Name("discrete_step")
    ->ArgNames({"robots", "parallel"})
    ->ArgsProduct({{100, 500}, {0, 1}})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(step<exploration_world>)
    ->Name("exploration_step")
    ->ArgNames({"robots", "parallel"})
    ->ArgsProduct({{30, 100}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
