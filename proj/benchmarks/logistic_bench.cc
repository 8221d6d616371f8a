#include <benchmark/benchmark.h>

#include "bench_data.h"
#include "cek/learners/logistic.h"

namespace {

void BM_FitLogistic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const cek::bench::Problem p = cek::bench::MakeProblem(n, d, 1);
  for (auto _ : state) {
    auto model = cek::learners::FitLogistic(p.x, p.y, {}, {.l2 = 1.0});
    benchmark::DoNotOptimize(model);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitLogistic)->Args({1000, 10})->Args({10000, 10})->Args({10000, 50})
    ->Unit(benchmark::kMillisecond);

}  // namespace
