#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "trackforge/error.hpp"
#include "trackforge/metrics.hpp"
#include "trackforge/simulate.hpp"

using trackforge::BoundingBox;
using trackforge::GroundTruth;
using trackforge::LabeledBox;
using trackforge::TrackSet;

namespace {

TrackSet as_tracks(const std::vector<LabeledBox>& boxes) {
  TrackSet ts;
  std::map<int, trackforge::Tracklet> by_id;
  auto sorted = boxes;
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledBox& a, const LabeledBox& b) { return a.frame < b.frame; });
  for (const auto& b : sorted) {
    auto& t = by_id[b.id];
    t.id = b.id;
    t.records.push_back({b.frame, b.box, 1.0});
  }
  for (auto& [id, t] : by_id) ts.tracklets.push_back(std::move(t));
  return ts;
}

// Random micro scenario: up to 3 frames and 3 boxes per side per frame,
// ids from a small pool so that associations recur across frames.
std::pair<std::vector<LabeledBox>, std::vector<LabeledBox>> micro(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> frames(1, 3), count(0, 3);
  std::uniform_real_distribution<double> pos(0.0, 30.0), size(10.0, 25.0), jitter(-6.0, 6.0);
  std::vector<LabeledBox> gt, pred;
  const int nf = frames(rng);
  for (int f = 1; f <= nf; ++f) {
    std::vector<int> gids{1, 2, 3};
    std::shuffle(gids.begin(), gids.end(), rng);
    const int ng = count(rng);
    std::vector<BoundingBox> placed;
    for (int i = 0; i < ng; ++i) {
      BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
      gt.push_back({f, gids[static_cast<std::size_t>(i)], b});
      placed.push_back(b);
    }
    std::vector<int> pids{1, 2, 3, 4};
    std::shuffle(pids.begin(), pids.end(), rng);
    const int np = count(rng);
    for (std::size_t j = 0; j < static_cast<std::size_t>(np); ++j) {
      // Mostly perturbed copies of gt boxes, otherwise free-floating.
      BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
      if (j < placed.size() && j != 2) {
        b = placed[j];
        b.x += jitter(rng);
        b.y += jitter(rng);
      }
      pred.push_back({f, pids[j], b});
    }
  }
  return {gt, pred};
}

}  // namespace

TEST(DetA, Arithmetic) {
  EXPECT_DOUBLE_EQ(trackforge::det_a(10, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(trackforge::det_a(5, 3, 2), 0.5);
  EXPECT_DOUBLE_EQ(trackforge::det_a(0, 0, 0), 1.0);
}

TEST(AlphaGrid, NineteenThresholds) {
  const auto g = trackforge::default_alpha_grid();
  ASSERT_EQ(g.size(), 19u);
  EXPECT_DOUBLE_EQ(g.front(), 0.05);
  EXPECT_DOUBLE_EQ(g.back(), 0.95);
  EXPECT_EQ(g[9], 0.5);
}

TEST(MatchPerAlpha, SelfMatchAndEmptyPrediction) {
  const auto sc = trackforge::gen_scenario(fixtures::clean_config(1));
  const auto m = trackforge::match_per_alpha(sc.ground_truth, trackforge::oracle_tracks(sc), 0.95);
  EXPECT_EQ(m.tp.size(), sc.ground_truth.boxes.size());
  EXPECT_TRUE(m.fn.empty());
  EXPECT_TRUE(m.fp.empty());
  const auto none = trackforge::match_per_alpha(sc.ground_truth, TrackSet{}, 0.5);
  EXPECT_TRUE(none.tp.empty());
  EXPECT_EQ(none.fn.size(), sc.ground_truth.boxes.size());
  EXPECT_TRUE(none.fp.empty());
}

TEST(MatchPerAlpha, RejectsAlphaOutOfRange) {
  EXPECT_THROW(trackforge::match_per_alpha({}, {}, 0.0), trackforge::Error);
  EXPECT_THROW(trackforge::match_per_alpha({}, {}, 1.0), trackforge::Error);
}

TEST(MatchPerAlpha, SwappedBoxMatchesExhaustiveOracle) {
  // Two identities over two frames; in frame 2 the prediction labels are
  // swapped on one box.
  const std::vector<LabeledBox> gt{{1, 1, {0, 0, 10, 10}}, {1, 2, {30, 0, 10, 10}},
                                   {2, 1, {1, 0, 10, 10}}, {2, 2, {31, 0, 10, 10}}};
  const std::vector<LabeledBox> pred{{1, 1, {0, 0, 10, 10}}, {1, 2, {30, 0, 10, 10}},
                                     {2, 2, {1, 0, 10, 10}}, {2, 3, {31, 0, 10, 10}}};
  const auto report = trackforge::hota(GroundTruth{gt}, as_tracks(pred));
  const auto expected = oracle::exhaustive_hota(gt, pred, trackforge::default_alpha_grid(), 0.5);
  EXPECT_NEAR(report.hota, expected.hota, 1e-12);
  EXPECT_NEAR(report.ass_a, expected.ass_a, 1e-12);
  EXPECT_EQ(report.idsw, expected.idsw);
  EXPECT_EQ(report.idsw, 2);
}

TEST(AssA, EvenSplitGivesHalf) {
  // One identity over four frames, predicted as id 1 then id 2.
  std::vector<LabeledBox> gt, pred;
  for (int f = 1; f <= 4; ++f) {
    gt.push_back({f, 1, {0, 0, 10, 10}});
    pred.push_back({f, f <= 2 ? 1 : 2, {0, 0, 10, 10}});
  }
  const auto m = trackforge::match_per_alpha(GroundTruth{gt}, as_tracks(pred), 0.5);
  ASSERT_EQ(m.tp.size(), 4u);
  EXPECT_DOUBLE_EQ(trackforge::ass_a(m), 0.5);
  EXPECT_DOUBLE_EQ(trackforge::loc_a(m), 1.0);
  EXPECT_EQ(trackforge::idsw(GroundTruth{gt}, as_tracks(pred)), 1);
}

TEST(LocA, MeanIou) {
  trackforge::AlphaMatching m;
  m.tp.push_back({1, 1, 1, 0.6});
  m.tp.push_back({2, 1, 1, 0.8});
  EXPECT_DOUBLE_EQ(trackforge::loc_a(m), 0.7);
  EXPECT_DOUBLE_EQ(trackforge::loc_a(trackforge::AlphaMatching{}), 0.0);
}

TEST(Hota, PerfectPrediction) {
  const auto sc = trackforge::gen_scenario(fixtures::clean_config(2));
  const auto r = trackforge::hota(sc.ground_truth, trackforge::oracle_tracks(sc));
  EXPECT_EQ(r.hota, 1.0);
  EXPECT_EQ(r.det_a, 1.0);
  EXPECT_EQ(r.ass_a, 1.0);
  EXPECT_EQ(r.loc_a, 1.0);
  EXPECT_EQ(r.idsw, 0);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
  EXPECT_FALSE(r.empty_scene);
}

TEST(Hota, EmptySceneConvention) {
  const auto r = trackforge::hota(GroundTruth{}, TrackSet{});
  EXPECT_TRUE(r.empty_scene);
  EXPECT_EQ(r.hota, 1.0);
  EXPECT_EQ(r.det_a, 1.0);
}

TEST(Hota, PaperTableArithmetic) {
  EXPECT_NEAR(std::sqrt(0.76 * 0.47), 0.5977, 5e-5);
  EXPECT_NEAR(std::round(std::sqrt(0.76 * 0.47) * 100.0) / 100.0, 0.60, 1e-12);
}

TEST(Hota, GeometricMeanIdentityAndBounds) {
  auto cfg = fixtures::occlusion_heavy_config();
  cfg.frames = 100;
  const auto sc = trackforge::gen_scenario(cfg);
  auto [cut, log] = trackforge::inject_cuts(trackforge::oracle_tracks(sc), {{1, 40}, {2, 60}});
  (void)log;
  const auto r = trackforge::hota(sc.ground_truth, cut);
  double mean = 0.0;
  for (const auto& a : r.per_alpha) {
    EXPECT_NEAR(a.hota, std::sqrt(a.det_a * a.ass_a), 1e-9);
    for (double v : {a.hota, a.det_a, a.ass_a, a.loc_a}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    mean += a.hota;
  }
  EXPECT_NEAR(r.hota, mean / static_cast<double>(r.per_alpha.size()), 1e-12);
}

TEST(Hota, MatchesExhaustiveOracleOnMicroScenarios) {
  std::mt19937_64 rng(51);
  const auto alphas = trackforge::default_alpha_grid();
  for (int trial = 0; trial < 200; ++trial) {
    const auto [gt, pred] = micro(rng);
    const auto r = trackforge::hota(GroundTruth{gt}, as_tracks(pred));
    const auto o = oracle::exhaustive_hota(gt, pred, alphas, 0.5);
    ASSERT_EQ(r.per_alpha.size(), o.per_alpha.size());
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      EXPECT_EQ(r.per_alpha[k].tp, o.per_alpha[k].tp) << "trial " << trial << " alpha " << alphas[k];
      EXPECT_EQ(r.per_alpha[k].fn, o.per_alpha[k].fn);
      EXPECT_EQ(r.per_alpha[k].fp, o.per_alpha[k].fp);
      EXPECT_NEAR(r.per_alpha[k].ass_a, o.per_alpha[k].ass_a, 1e-12);
      EXPECT_NEAR(r.per_alpha[k].loc_a, o.per_alpha[k].loc_a, 1e-12);
    }
    EXPECT_NEAR(r.hota, o.hota, 1e-12) << "trial " << trial;
    EXPECT_NEAR(r.det_a, o.det_a, 1e-12);
    EXPECT_NEAR(r.ass_a, o.ass_a, 1e-12);
    EXPECT_NEAR(r.loc_a, o.loc_a, 1e-12);
    EXPECT_EQ(r.fp, o.fp);
    EXPECT_EQ(r.fn, o.fn);
    EXPECT_EQ(r.idsw, o.idsw) << "trial " << trial;
  }
}

TEST(Hota, AddingFalsePositivesDegrades) {
  const auto sc = trackforge::gen_scenario(fixtures::clean_config(3));
  auto pred = trackforge::oracle_tracks(sc);
  const auto base = trackforge::hota(sc.ground_truth, pred);
  trackforge::Tracklet junk;
  junk.id = 999;
  for (int f = 1; f <= 50; ++f) junk.records.push_back({f, {6000, 3000, 20, 40}, 0.5});
  pred.tracklets.push_back(junk);
  const auto worse = trackforge::hota(sc.ground_truth, pred);
  EXPECT_LT(worse.det_a, base.det_a);
  EXPECT_LE(worse.hota, base.hota);
  EXPECT_EQ(worse.fp, 50);
}

TEST(Hota, InvariantUnderIdRelabeling) {
  auto cfg = fixtures::occlusion_heavy_config();
  cfg.frames = 100;
  const auto sc = trackforge::gen_scenario(cfg);
  auto [pred, log] = trackforge::inject_id_swaps(trackforge::oracle_tracks(sc), {{1, 2, 50}});
  (void)log;
  auto relabeled = pred;
  for (auto& t : relabeled.tracklets) t.id = 1000 - t.id;
  const auto a = trackforge::hota(sc.ground_truth, pred);
  const auto b = trackforge::hota(sc.ground_truth, relabeled);
  EXPECT_NEAR(a.hota, b.hota, 1e-12);
  EXPECT_NEAR(a.ass_a, b.ass_a, 1e-12);
  EXPECT_EQ(a.idsw, b.idsw);
}

TEST(Hota, InvariantUnderInputOrder) {
  auto cfg = fixtures::occlusion_heavy_config();
  cfg.frames = 80;
  const auto sc = trackforge::gen_scenario(cfg);
  const auto pred = trackforge::oracle_tracks(sc);
  auto shuffled = sc.ground_truth;
  std::mt19937_64 rng(52);
  std::shuffle(shuffled.boxes.begin(), shuffled.boxes.end(), rng);
  const auto a = trackforge::hota(sc.ground_truth, pred);
  const auto b = trackforge::hota(shuffled, pred);
  EXPECT_EQ(a.hota, b.hota);
  EXPECT_EQ(a.idsw, b.idsw);
  EXPECT_EQ(a.fp, b.fp);
}

TEST(Idsw, InjectedSwapsMatchLog) {
  const auto sc = trackforge::gen_scenario(fixtures::clean_config(4));
  const auto tracks = trackforge::oracle_tracks(sc);
  const auto [swapped, log] =
      trackforge::inject_id_swaps(tracks, {{1, 2, 100}, {3, 4, 200}, {5, 6, 300}, {1, 7, 400}});
  long expected = 0;
  for (const auto& s : log) expected += s.expected_switches;
  EXPECT_EQ(expected, 8);
  EXPECT_EQ(trackforge::idsw(sc.ground_truth, swapped), expected);
  EXPECT_EQ(trackforge::idsw(sc.ground_truth, tracks), 0);
}

TEST(GroundTruthTest, ValidateRejectsDuplicatesAndBadIds) {
  EXPECT_THROW(trackforge::validate(GroundTruth{{{1, 1, {0, 0, 1, 1}}, {1, 1, {2, 2, 1, 1}}}}),
               trackforge::Error);
  EXPECT_THROW(trackforge::validate(GroundTruth{{{1, 0, {0, 0, 1, 1}}}}), trackforge::Error);
}

TEST(MeanReport, AveragesCounts) {
  trackforge::MetricReport a, b;
  a.hota = 0.5;
  b.hota = 0.7;
  a.idsw = 3;
  b.idsw = 4;
  const auto m = trackforge::mean_of({a, b});
  EXPECT_DOUBLE_EQ(m.hota, 0.6);
  EXPECT_DOUBLE_EQ(m.idsw, 3.5);
}
