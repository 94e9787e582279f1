// Serial-vs-parallel throughput comparison for the two hot kernels: the
// Monte-Carlo replicate loop and the composition-sum series evaluation.

#include <benchmark/benchmark.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "subspace_uq/harness.hpp"
#include "subspace_uq/series.hpp"

using namespace subspace_uq;

namespace {

ExperimentConfig bench_config() {
  ExperimentConfig config;
  config.dims = Dims(60, 120, 3);
  config.lambda_base = 30.0;
  config.replicates = 200;
  config.seed = 1;
  config.kind = ExperimentKind::kBiasApprox;
  return config;
}

void BM_ReplicateLoopSerial(benchmark::State& state) {
  const ExperimentConfig config = bench_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(run_experiment_serial(config));
}

void BM_ReplicateLoopParallel(benchmark::State& state) {
  ExperimentConfig config = bench_config();
  config.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(config));
}

struct SeriesFixture {
  SeriesFixture()
      : model(make_model(Dims(20, 20, 3), geometric_lambda(3, 8.0), 1)),
        dil(dilate(model)) {
    z = sample_noise(Dims(20, 20, 1), {2, 0, 1.0});
    z *= 0.1 * dil.lambda_min() / spectral_norm(z);
  }
  LowRankModel model;
  SymmetricDilation dil;
  Matrix z;
};

void BM_SeriesTermOrder8(benchmark::State& state) {
  static const SeriesFixture fx;
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(state.range(0)));
#endif
  for (auto _ : state)
    benchmark::DoNotOptimize(series_term(fx.dil, fx.z, 8));
}

}  // namespace

BENCHMARK(BM_ReplicateLoopSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicateLoopParallel)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SeriesTermOrder8)
    ->Arg(1)
    ->Arg(2)
    ->Arg(4)
    ->Arg(8)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
