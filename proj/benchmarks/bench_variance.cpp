#include <benchmark/benchmark.h>

#include "gvx/variance.hpp"

using namespace gvx;

static void BM_reference_point(benchmark::State& state) {
    EvalConfig cfg;
    cfg.tol = 1e-10;
    for (auto _ : state) {
        const SampleVarianceModel m({1.0, 10}, cfg);
        benchmark::DoNotOptimize(m.cdf(4.0, Representation::series));
    }
}
BENCHMARK(BM_reference_point)->Unit(benchmark::kMillisecond);

static void BM_warm(benchmark::State& state) {
    const auto rep = static_cast<Representation>(state.range(0));
    EvalConfig cfg;
    cfg.tol = 1e-8;
    const SampleVarianceModel m({1.0, 5}, cfg);
    benchmark::DoNotOptimize(m.cdf(1.0, rep));
    double s2 = 0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(m.cdf(s2, rep));
        s2 = s2 < 2.5 ? s2 + 0.25 : 0.5;
    }
}
BENCHMARK(BM_warm)
    ->Arg(static_cast<int>(Representation::series))
    ->Arg(static_cast<int>(Representation::svar_mixture))
    ->Arg(static_cast<int>(Representation::truncated))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
