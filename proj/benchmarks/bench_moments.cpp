#include <benchmark/benchmark.h>

#include "gvx/angle.hpp"
#include "gvx/coeffs.hpp"

using namespace gvx;

static void BM_build_moments(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_moments({1.0, 10}, K));
    state.SetComplexityN(K);
}
BENCHMARK(BM_build_moments)->Arg(250)->Arg(500)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond)->Complexity();

static void BM_diff_weights(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const MomentTable t = build_moments({2.0, 5}, K);
    const std::vector<Real> s = scaled_moments(t, sqrt(Real(5)));
    for (auto _ : state) benchmark::DoNotOptimize(diff_weights(s, K, false));
}
BENCHMARK(BM_diff_weights)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_solve_angle(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_angle_coeffs({2.0, n}));
}
BENCHMARK(BM_solve_angle)->Arg(3)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
