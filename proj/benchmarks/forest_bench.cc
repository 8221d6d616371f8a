#include <benchmark/benchmark.h>

#include "bench_data.h"
#include "cek/learners/forest.h"

namespace {

void BM_FitForest(benchmark::State& state) {
  const cek::bench::Problem p = cek::bench::MakeProblem(static_cast<std::size_t>(state.range(0)), 10, 2);
  cek::learners::ForestParams params;
  params.num_trees = static_cast<int>(state.range(1));
  params.seed = 3;
  for (auto _ : state) {
    auto model = cek::learners::FitForest(p.x, p.y, params);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_FitForest)->Args({1000, 50})->Args({5000, 50})->Unit(benchmark::kMillisecond);

void BM_ForestOutOfBag(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const cek::bench::Problem p = cek::bench::MakeProblem(n, 10, 4);
  cek::learners::ForestParams params;
  params.num_trees = 100;
  params.seed = 5;
  const auto model = cek::learners::FitForest(p.x, p.y, params);
  std::vector<std::size_t> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = i;
  for (auto _ : state) {
    auto pred = model.Predict(p.x, cek::learners::ForestPredictMode::kOutOfBag, index);
    benchmark::DoNotOptimize(pred);
  }
}
BENCHMARK(BM_ForestOutOfBag)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
