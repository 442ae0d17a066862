#include <benchmark/benchmark.h>

#include "qcavity/jet.hpp"

using namespace qcavity;

static void BM_JetMulOrder3(benchmark::State& state) {
    auto a = jet_var(0.3, Axis::X, 3);
    auto b = jet_var(0.4, Axis::Y, 3);
    for (auto _ : state) {
        auto c = jet_mul(a, b);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_JetMulOrder3);

BENCHMARK_MAIN();
