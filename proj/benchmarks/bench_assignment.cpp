#include <random>

#include <benchmark/benchmark.h>

#include "trackforge/assignment.hpp"

namespace {

trackforge::CostMatrix random_matrix(std::size_t rows, std::size_t cols, double gated_fraction) {
  std::mt19937_64 rng(rows * 131 + cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  trackforge::CostMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m.set_cost(r, c, u(rng));
      if (u(rng) < gated_fraction) m.set_gated(r, c);
    }
  }
  return m;
}

void BM_SolveSquare(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_matrix(n, n, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::solve(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveSquare)->RangeMultiplier(2)->Range(8, 256)->Complexity();

// Tracker-shaped input: few tracks against many detections, mostly gated.
void BM_SolveWideGated(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 400, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::solve(m));
}
BENCHMARK(BM_SolveWideGated)->Arg(10)->Arg(50)->Arg(200);

}  // namespace
