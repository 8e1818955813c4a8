#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "trackforge/appearance.hpp"
#include "trackforge/geometry.hpp"

namespace {

std::vector<trackforge::BoundingBox> boxes(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0.0, 500.0), size(5.0, 60.0);
  std::vector<trackforge::BoundingBox> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({pos(rng), pos(rng), size(rng), size(rng)});
  return out;
}

void BM_Eiou(benchmark::State& state) {
  const auto b = boxes(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trackforge::eiou(b[i & 1023], b[(i + 7) & 1023], 0.7));
    ++i;
  }
}
BENCHMARK(BM_Eiou);

void BM_CosineDistance(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(dim), b(dim);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng);
  const auto ea = trackforge::Embedding::normalize(a);
  const auto eb = trackforge::Embedding::normalize(b);
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::cosine_distance(ea, eb));
}
BENCHMARK(BM_CosineDistance)->Arg(32)->Arg(512);

}  // namespace
