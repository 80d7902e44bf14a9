#include <benchmark/benchmark.h>

#include "gvx/sumsq.hpp"

using namespace gvx;

namespace {

const MomentTable& table() {
    static const MomentTable t = build_moments({1.0, 5}, 2000);
    return t;
}

EvalConfig config() {
    EvalConfig cfg;
    cfg.tol = 1e-10;
    return cfg;
}

}  // namespace

static void BM_power(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 4;
    const MomentTable& t = table();
    for (auto _ : state) benchmark::DoNotOptimize(cdf_sumsq_power(t, r, config()));
}
BENCHMARK(BM_power)->Arg(2)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_mixture(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 4;
    const MomentTable& t = table();
    for (auto _ : state) benchmark::DoNotOptimize(cdf_sumsq_mixture(t, r, config()));
}
BENCHMARK(BM_mixture)->Arg(2)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_legendre(benchmark::State& state) {
    const double r = static_cast<double>(state.range(0)) / 4;
    const MomentTable& t = table();
    for (auto _ : state) benchmark::DoNotOptimize(cdf_sumsq_legendre(t, r, config()));
}
BENCHMARK(BM_legendre)->Arg(2)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_model_cold(benchmark::State& state) {
    for (auto _ : state) {
        const SumSquaresModel m({2.0, 5}, config());
        benchmark::DoNotOptimize(m.cdf(1.5));
    }
}
BENCHMARK(BM_model_cold)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
