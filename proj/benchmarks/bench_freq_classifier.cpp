#include <benchmark/benchmark.h>

#include <random>

#include "factrace/freq_classifier.hpp"

namespace {

factrace::LabeledDataset make_data(std::size_t n) {
  std::mt19937_64 rng(3);
  factrace::LabeledDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    auto f = rng() % 100000;
    data.push_back({static_cast<factrace::FactId>(i), f, (rng() % 100000) < f});
  }
  return data;
}

void BM_OptimalThreshold(benchmark::State& state) {
  auto data = make_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(factrace::optimal_threshold(data).threshold);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_OptimalThreshold)->Range(1 << 8, 1 << 16)->Complexity(benchmark::oNLogN);

void BM_Bootstrap(benchmark::State& state) {
  auto data = make_data(1200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(factrace::bootstrap(data, static_cast<std::size_t>(state.range(0)), 0.9, 7).threshold.mean);
  }
}
BENCHMARK(BM_Bootstrap)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
