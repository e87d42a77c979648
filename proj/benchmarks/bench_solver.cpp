#include <benchmark/benchmark.h>

#include <memory>

#include <lrp/model.hpp>
#include <lrp/network.hpp>
#include <lrp/solver.hpp>

namespace {

void solve(benchmark::State& state, lrp::SolverMethod method) {
  const auto n = static_cast<lrp::Site>(state.range(0));
  const auto sample = lrp::sample_window({1.0, 23}, 0, n - 1);
  const auto net = std::make_shared<const lrp::Network>(lrp::network_from_sample(sample));
  lrp::SolverOptions options;
  options.method = method;
  for (auto _ : state) {
    auto r = lrp::two_point_resistance(net, net->at(lrp::Site{0}), net->at(n - 1), options);
    benchmark::DoNotOptimize(r.value);
  }
  state.SetComplexityN(state.range(0));
}

void BM_DenseCholesky(benchmark::State& state) { solve(state, lrp::SolverMethod::dense_cholesky); }
void BM_SparseCholesky(benchmark::State& state) { solve(state, lrp::SolverMethod::sparse_cholesky); }
void BM_ConjugateGradient(benchmark::State& state) {
  solve(state, lrp::SolverMethod::conjugate_gradient);
}

BENCHMARK(BM_DenseCholesky)->RangeMultiplier(2)->Range(64, 2048)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SparseCholesky)->RangeMultiplier(2)->Range(64, 16384)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConjugateGradient)->RangeMultiplier(2)->Range(64, 16384)->Unit(benchmark::kMicrosecond);

}  // namespace
