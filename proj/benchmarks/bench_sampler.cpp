#include <benchmark/benchmark.h>

#include <lrp/model.hpp>

namespace {

void BM_SkipSampler(benchmark::State& state) {
  const lrp::ModelParams params{1.0, 17};
  const auto n = static_cast<lrp::Site>(state.range(0));
  std::uint64_t replicate = 0;
  for (auto _ : state) {
    auto s = lrp::sample_window(params, 0, n - 1, {}, replicate++);
    benchmark::DoNotOptimize(s.edges.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SkipSampler)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_BernoulliSampler(benchmark::State& state) {
  const lrp::ModelParams params{1.0, 17};
  const auto n = static_cast<lrp::Site>(state.range(0));
  std::uint64_t replicate = 0;
  for (auto _ : state) {
    auto s = lrp::sample_window_bernoulli(params, 0, n - 1, {}, replicate++);
    benchmark::DoNotOptimize(s.edges.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BernoulliSampler)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_ContractedComplement(benchmark::State& state) {
  const lrp::ModelParams params{1.0, 17};
  const auto n = static_cast<lrp::Site>(state.range(0));
  std::uint64_t replicate = 0;
  for (auto _ : state) {
    auto s = lrp::sample_with_contracted_complement(params, {0, 0}, n, 8 * n, {}, replicate++);
    benchmark::DoNotOptimize(s.edges.data());
  }
}
BENCHMARK(BM_ContractedComplement)->RangeMultiplier(4)->Range(64, 4096);

}  // namespace
