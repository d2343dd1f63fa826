// Serial vs OpenMP timings for the Monte Carlo kernels.
// Arg 0 is the thread count; 0 runs the serial reference.

#include <cstdint>

#include <benchmark/benchmark.h>

#include "ddlab/datagen.hpp"
#include "ddlab/estimators.hpp"
#include "ddlab/kernels.hpp"

using namespace ddlab;

namespace {

Matrix design(Eigen::Index rows, Eigen::Index cols, Seed seed) {
  Engine e(seed);
  return gaussian_matrix(rows, cols, e);
}

void BM_mask_objective(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const Matrix x = design(200, 50, 1);
  const Vector beta = design(50, 1, 2).col(0);
  const Vector y = x * beta + design(200, 1, 3).col(0);
  for (auto _ : state) {
    const kernels::Moments m = threads == 0
                                   ? kernels::mask_objective_serial(x, y, beta, 0.7, 8192, 11)
                                   : kernels::mask_objective_omp(x, y, beta, 0.7, 8192, 11, threads);
    benchmark::DoNotOptimize(m.mean);
  }
  state.SetItemsProcessed(state.iterations() * 8192);
}

void BM_feature_mask(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const Matrix a = design(200, 64, 4);
  const Matrix y = design(200, 1, 5);
  for (auto _ : state) {
    const kernels::Moments m = threads == 0 ? kernels::feature_mask_serial(a, y, 0.6, 4096, 12)
                                            : kernels::feature_mask_omp(a, y, 0.6, 4096, 12, threads);
    benchmark::DoNotOptimize(m.mean);
  }
  state.SetItemsProcessed(state.iterations() * 4096);
}

void BM_trial_map(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto out = kernels::map_indices(64, threads, [](std::int64_t i) {
      const Matrix x = design(120, 40, static_cast<Seed>(i));
      return (x.transpose() * x).trace();
    });
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(BM_mask_objective)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_feature_mask)->Arg(0)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_trial_map)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
