// Micro-benchmarks for the hot paths: special-function evaluation, the
// combined-class root solve, LP build + simplex, and the path simulator.

#include <benchmark/benchmark.h>

#include "ergotrack/localsolve.hpp"
#include "ergotrack/occulp.hpp"
#include "ergotrack/simkit.hpp"
#include "ergotrack/specfun.hpp"

using namespace ergotrack;

namespace {

void BM_KummerEval(benchmark::State& state) {
    double z = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(specfun::kummer_1f1({0.21, 0.5, z}));
        z = z < 30.0 ? z + 0.1 : 0.1;
    }
}
BENCHMARK(BM_KummerEval);

void BM_WeberEven(benchmark::State& state) {
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(specfun::weber_even(x, -0.25));
        x = x < 3.0 ? x + 0.01 : 0.0;
    }
}
BENCHMARK(BM_WeberEven);

void BM_FindIotaCombinedImpulse(benchmark::State& state) {
    ModelParams p{1, 1, 1, 1, 0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            localsolve::find_iota(p, ControlClass::CombinedImpulse));
    }
}
BENCHMARK(BM_FindIotaCombinedImpulse);

void BM_FindIotaCombinedSingular(benchmark::State& state) {
    ModelParams p{1, 1, 1, 0, 0.5};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            localsolve::find_iota(p, ControlClass::CombinedSingular));
    }
}
BENCHMARK(BM_FindIotaCombinedSingular);

void BM_SolveImpulseSystem(benchmark::State& state) {
    ModelParams p{1, 2, 0, 0.5, 0.3};
    for (auto _ : state) {
        benchmark::DoNotOptimize(localsolve::solve_impulse(p));
    }
}
BENCHMARK(BM_SolveImpulseSystem);

void BM_BuildLP(benchmark::State& state) {
    ModelParams p{1, 1, 1, 0, 0};
    auto g = occulp::default_grid(p, ControlClass::Regular,
                                  int(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(occulp::build_lp(p, ControlClass::Regular, g));
    }
}
BENCHMARK(BM_BuildLP)->Arg(41)->Arg(81);

void BM_SolveLP(benchmark::State& state) {
    ModelParams p{1, 1, 1, 0, 0};
    auto g = occulp::default_grid(p, ControlClass::Regular,
                                  int(state.range(0)));
    auto lp = occulp::build_lp(p, ControlClass::Regular, g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(occulp::solve_lp(lp));
    }
}
BENCHMARK(BM_SolveLP)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_SimulatePlain(benchmark::State& state) {
    ModelParams p{1, 1, 1, 0, 0};
    auto strat = simkit::optimal_strategy(localsolve::solve_regular(p));
    simkit::PathConfig c;
    c.dt = 1e-3;
    c.horizon = 100.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simkit::simulate(p, strat, c));
    }
    state.SetItemsProcessed(state.iterations() *
                            int64_t(c.horizon / c.dt));
}
BENCHMARK(BM_SimulatePlain)->Unit(benchmark::kMillisecond);

void BM_SimulateWithResiduals(benchmark::State& state) {
    ModelParams p{1, 1, 1, 0, 0.5};
    auto strat = simkit::optimal_strategy(
        localsolve::solve_combined_singular(p));
    simkit::PathConfig c;
    c.dt = 1e-3;
    c.horizon = 100.0;
    c.track_residuals = true;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simkit::simulate(p, strat, c));
    }
    state.SetItemsProcessed(state.iterations() *
                            int64_t(c.horizon / c.dt));
}
BENCHMARK(BM_SimulateWithResiduals)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
