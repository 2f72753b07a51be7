// Serial vs OpenMP ensemble kernels on a Brownian QV workload.

#include <benchmark/benchmark.h>

#include <cmath>

#include "pathcalc/bk.hpp"
#include "pathcalc/ensemble.hpp"
#include "pathcalc/simulate.hpp"

namespace {

using namespace pathcalc;

PathKernel qv_kernel(int level) {
  GeneratorSpec g;
  g.level = level;
  g.seed = 17;
  BkConfig bk;
  bk.max_level = level - 2;
  return [g, bk](std::uint64_t p) {
    const auto w = generate(g, p);
    const auto B = quad_variation(w, 0, 0, bk);
    double sup = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      sup = std::max(sup, std::abs(B.path.at(k, 0) - w.grid()[k]));
    return std::vector<double>{sup};
  };
}

void BM_EnsembleSerial(benchmark::State& state) {
  const auto kernel = qv_kernel(static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble_serial(state.range(0), kernel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto kernel = qv_kernel(static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(run_ensemble_parallel(state.range(0), kernel));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_EnsembleSerial)->Args({32, 10})->Args({32, 12})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Args({32, 10})->Args({32, 12})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
