#include <benchmark/benchmark.h>

#include "trackforge/metrics.hpp"
#include "trackforge/online_tracker.hpp"
#include "trackforge/refinement.hpp"
#include "trackforge/simulate.hpp"

namespace {

trackforge::Scenario scenario(int frames) {
  trackforge::ScenarioConfig c;
  c.frames = frames;
  c.seed = 7;
  c.detector.p_miss = 0.1;
  c.occlusion.p_drop = 0.5;
  return trackforge::gen_scenario(c);
}

void BM_TrackerRun(benchmark::State& state) {
  const auto bundle = trackforge::to_bundle(scenario(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::run(bundle, trackforge::TrackerConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(bundle.detections.size()));
}
BENCHMARK(BM_TrackerRun)->Arg(150)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_Refine(benchmark::State& state) {
  const auto sc = scenario(600);
  const auto tracks = trackforge::run(trackforge::to_bundle(sc), trackforge::TrackerConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::refine(tracks, trackforge::RefineConfig{}));
}
BENCHMARK(BM_Refine)->Unit(benchmark::kMillisecond);

void BM_Hota(benchmark::State& state) {
  const auto sc = scenario(600);
  const auto tracks = trackforge::run(trackforge::to_bundle(sc), trackforge::TrackerConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(trackforge::hota(sc.ground_truth, tracks));
}
BENCHMARK(BM_Hota)->Unit(benchmark::kMillisecond);

}  // namespace
