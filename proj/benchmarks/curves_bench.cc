#include <benchmark/benchmark.h>

#include <vector>

#include "bench_data.h"
#include "cek/eval/curves.h"

namespace {

void BM_RocCurve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const cek::bench::Problem p = cek::bench::MakeProblem(n, 3, 6);
  std::vector<int> labels(p.y.begin(), p.y.end());
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = 1.0 / (labels[i] ? p.score[i] : 1.0 - p.score[i]);
  const bool weighted = state.range(1) != 0;
  for (auto _ : state) {
    auto c = weighted ? cek::eval::RocCurve(p.score, labels, weights)
                      : cek::eval::RocCurve(p.score, labels);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocCurve)->Args({10000, 0})->Args({10000, 1})->Args({100000, 0});

void BM_ExpectedRoc(benchmark::State& state) {
  const cek::bench::Problem p = cek::bench::MakeProblem(static_cast<std::size_t>(state.range(0)), 3, 7);
  for (auto _ : state) {
    auto c = cek::eval::ExpectedRoc(p.score);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_ExpectedRoc)->Arg(10000);

}  // namespace
