#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "trackforge/error.hpp"
#include "trackforge/io.hpp"
#include "trackforge/simulate.hpp"

using trackforge::ErrorKind;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const trackforge::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::Internal;
}

std::string emb_header(std::uint32_t version, std::uint32_t count, std::uint32_t dim) {
  std::string s = "EMB1";
  for (std::uint32_t v : {version, count, dim}) {
    for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
  }
  return s;
}

std::string floats(const std::vector<float>& v) {
  std::string s;
  for (float f : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  }
  return s;
}

// Silences the stderr warning sink for the lifetime of the guard.
struct QuietWarnings {
  std::vector<std::string> seen;
  QuietWarnings() {
    trackforge::set_warning_handler([this](std::string_view m) { seen.emplace_back(m); });
  }
  ~QuietWarnings() { trackforge::set_warning_handler(nullptr); }
};

}  // namespace

TEST(ReadDetections, ParsesMotLine) {
  std::istringstream in("1,-1,10,20,30,40,0.9,-1,-1,-1\n");
  const auto d = trackforge::parse_detections(in, "x");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].frame, 1);
  EXPECT_EQ(d[0].box, (trackforge::BoundingBox{10, 20, 30, 40}));
  EXPECT_DOUBLE_EQ(d[0].confidence, 0.9);
  EXPECT_EQ(d[0].embedding_index, 0u);
}

TEST(ReadDetections, ZeroWidthNamesTheLine) {
  std::istringstream in("1,-1,10,20,30,40,0.9\n2,-1,10,20,0,40,0.9\n");
  try {
    trackforge::parse_detections(in, "dets.txt");
    FAIL() << "expected a parse error";
  } catch (const trackforge::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("dets.txt:2"), std::string::npos) << e.what();
  }
}

TEST(ReadDetections, MalformedLines) {
  for (const char* text : {"1,-1,10,20,30\n", "a,-1,10,20,30,40,0.9\n", "0,-1,1,1,1,1,0.5\n",
                           "1,-1,1,1,1,1,1.5\n", "1,-1,1,nan,1,1,0.5\n"}) {
    std::istringstream in(text);
    EXPECT_EQ(kind_of([&] { trackforge::parse_detections(in, "d"); }), ErrorKind::Parse) << text;
  }
}

TEST(ReadDetections, SortsByFrameKeepingLineOrder) {
  std::istringstream in("3,-1,1,1,1,1,0.5\n1,-1,2,2,2,2,0.5\n3,-1,3,3,3,3,0.5\n1,-1,4,4,4,4,0.5\n");
  const auto d = trackforge::parse_detections(in, "d");
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d[0].embedding_index, 1u);
  EXPECT_EQ(d[1].embedding_index, 3u);
  EXPECT_EQ(d[2].embedding_index, 0u);
  EXPECT_EQ(d[3].embedding_index, 2u);
}

TEST(ReadDetections, EmptyFileWarns) {
  QuietWarnings q;
  std::istringstream in("");
  EXPECT_TRUE(trackforge::parse_detections(in, "d").empty());
  EXPECT_EQ(q.seen.size(), 1u);
}

TEST(ReadDetections, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { trackforge::read_detections("/nonexistent/dets.txt"); }), ErrorKind::Io);
}

TEST(Embeddings, ReadsHeaderAndRows) {
  fixtures::TempDir dir("emb");
  fixtures::spit(dir / "e.bin", emb_header(1, 2, 3) + floats({3, 4, 0, 0, 0, 2}));
  const auto t = trackforge::read_embeddings(dir / "e.bin", 2);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_DOUBLE_EQ(t.at(0).values()[0], 0.6);
  EXPECT_DOUBLE_EQ(t.at(1).values()[2], 1.0);
}

TEST(Embeddings, ErrorKinds) {
  fixtures::TempDir dir("emb-bad");
  const auto p = dir / "e.bin";
  fixtures::spit(p, "EMB2" + emb_header(1, 1, 2).substr(4) + floats({1, 0}));
  EXPECT_EQ(kind_of([&] { trackforge::read_embeddings(p, 1); }), ErrorKind::Format);
  fixtures::spit(p, emb_header(2, 1, 2) + floats({1, 0}));
  EXPECT_EQ(kind_of([&] { trackforge::read_embeddings(p, 1); }), ErrorKind::Format);
  fixtures::spit(p, emb_header(1, 2, 2) + floats({1, 0, 0}));
  EXPECT_EQ(kind_of([&] { trackforge::read_embeddings(p, 2); }), ErrorKind::Io);
  fixtures::spit(p, emb_header(1, 1, 2) + floats({std::numeric_limits<float>::infinity(), 0}));
  EXPECT_EQ(kind_of([&] { trackforge::read_embeddings(p, 1); }), ErrorKind::Data);
  fixtures::spit(p, emb_header(1, 1, 2) + floats({0, 0}));
  EXPECT_EQ(kind_of([&] { trackforge::read_embeddings(p, 1); }), ErrorKind::Data);
}

TEST(Embeddings, CountMismatchNamesBothCounts) {
  fixtures::TempDir dir("emb-count");
  fixtures::spit(dir / "e.bin", emb_header(1, 2, 2) + floats({1, 0, 0, 1}));
  try {
    trackforge::read_embeddings(dir / "e.bin", 3);
    FAIL() << "expected a consistency error";
  } catch (const trackforge::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Consistency);
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
}

TEST(Embeddings, RowsRoundTrip) {
  fixtures::TempDir dir("emb-rt");
  const std::vector<std::vector<float>> rows{{0.25f, -1.5f, 3.0f}, {1e-7f, 2.0f, -0.0f}};
  trackforge::write_embedding_rows(dir / "e.bin", 3, rows);
  const auto back = trackforge::read_embedding_rows(dir / "e.bin");
  EXPECT_EQ(back.dim, 3u);
  EXPECT_EQ(back.rows, rows);
  const auto bytes = fixtures::slurp(dir / "e.bin");
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(bytes.size(), 16u + 2 * 3 * 4);
}

TEST(Tracks, FormatIsSortedAndSixDecimals) {
  trackforge::TrackSet ts;
  ts.tracklets.push_back({2, {{1, {1, 2, 3, 4}, 0.5}, {2, {1.5, 2, 3, 4}, 0.5}}, {}});
  ts.tracklets.push_back({1, {{2, {10, 20, 30, 40}, 1.0}}, {}});
  EXPECT_EQ(trackforge::format_tracks(ts),
            "1,2,1.000000,2.000000,3.000000,4.000000,0.500000,-1,-1,-1\n"
            "2,1,10.000000,20.000000,30.000000,40.000000,1.000000,-1,-1,-1\n"
            "2,2,1.500000,2.000000,3.000000,4.000000,0.500000,-1,-1,-1\n");
  EXPECT_EQ(trackforge::format_tracks({}), "");
}

TEST(Tracks, WriteReadRoundTripWithHistory) {
  QuietWarnings q;
  fixtures::TempDir dir("tracks");
  auto cfg = fixtures::occlusion_heavy_config();
  cfg.frames = 60;
  const auto sc = trackforge::gen_scenario(cfg);
  auto tracks = trackforge::oracle_tracks(sc);
  // Drop one feature so the sidecar carries a zero row.
  tracks.tracklets[0].embeddings.erase(tracks.tracklets[0].embeddings.begin() + 1);
  trackforge::write_tracks(tracks, dir / "t.txt");
  trackforge::write_track_embeddings(tracks, dir / "t.emb");
  const auto back = trackforge::read_tracks(dir / "t.txt", dir / "t.emb");
  ASSERT_EQ(back.tracklets.size(), tracks.tracklets.size());
  for (std::size_t i = 0; i < tracks.tracklets.size(); ++i) {
    const auto& a = tracks.tracklets[i];
    const auto& b = back.tracklets[i];
    EXPECT_EQ(a.id, b.id);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
      EXPECT_EQ(a.records[k].frame, b.records[k].frame);
      EXPECT_NEAR(a.records[k].box.x, b.records[k].box.x, 1e-6);
      EXPECT_NEAR(a.records[k].box.h, b.records[k].box.h, 1e-6);
    }
    ASSERT_EQ(a.embeddings.size(), b.embeddings.size());
    for (std::size_t k = 0; k < a.embeddings.size(); ++k) {
      EXPECT_EQ(a.embeddings[k].frame, b.embeddings[k].frame);
      EXPECT_NEAR(trackforge::cosine_distance(a.embeddings[k].embedding, b.embeddings[k].embedding), 0.0,
                  1e-6);
    }
  }
  // Written again, the file is byte-identical.
  trackforge::write_tracks(back, dir / "t2.txt");
  EXPECT_EQ(fixtures::slurp(dir / "t.txt"), fixtures::slurp(dir / "t2.txt"));
}

TEST(GroundTruthIo, ParseAndReject) {
  std::istringstream ok("1,1,10,20,30,40,1,1,1\n1,2,11,20,30,40,1,1,1\n");
  EXPECT_EQ(trackforge::parse_ground_truth(ok, "g").boxes.size(), 2u);
  std::istringstream dup("1,1,10,20,30,40,1,1,1\n1,1,11,20,30,40,1,1,1\n");
  EXPECT_THROW(trackforge::parse_ground_truth(dup, "g"), trackforge::Error);
  std::istringstream zero("1,0,10,20,30,40,1,1,1\n");
  EXPECT_THROW(trackforge::parse_ground_truth(zero, "g"), trackforge::Error);
  std::istringstream bad("1,1,10,20,-30,40,1,1,1\n");
  EXPECT_EQ(kind_of([&] { trackforge::parse_ground_truth(bad, "g"); }), ErrorKind::Parse);
}

TEST(GroundTruthIo, RoundTrip) {
  fixtures::TempDir dir("gt");
  const auto sc = trackforge::gen_scenario(fixtures::clean_config(9));
  trackforge::write_ground_truth(sc.ground_truth, dir / "gt.txt");
  const auto back = trackforge::read_ground_truth(dir / "gt.txt");
  ASSERT_EQ(back.boxes.size(), sc.ground_truth.boxes.size());
  for (std::size_t i = 0; i < back.boxes.size(); ++i) {
    EXPECT_EQ(back.boxes[i].box, sc.ground_truth.boxes[i].box);
  }
}

TEST(LoadSequence, RowCountIsVerified) {
  fixtures::TempDir dir("seq");
  fixtures::spit(dir / "d.txt", "1,-1,1,1,5,5,0.9\n2,-1,1,1,5,5,0.9\n");
  fixtures::spit(dir / "e.bin", emb_header(1, 1, 2) + floats({1, 0}));
  EXPECT_EQ(kind_of([&] { trackforge::load_sequence(dir / "d.txt", dir / "e.bin"); }),
            ErrorKind::Consistency);
  fixtures::spit(dir / "e.bin", emb_header(1, 2, 2) + floats({1, 0, 0, 1}));
  const auto b = trackforge::load_sequence(dir / "d.txt", dir / "e.bin");
  EXPECT_EQ(b.frame_count, 2);
  EXPECT_EQ(b.frame(1).size(), 1u);
  EXPECT_EQ(b.frame(3).size(), 0u);
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = trackforge::parse_config("{}");
  EXPECT_DOUBLE_EQ(c.tracker.proximity_threshold, 0.9);
  EXPECT_DOUBLE_EQ(c.refine.eps, 0.5);
  EXPECT_EQ(c.metrics.alpha_grid.size(), 19u);
  EXPECT_EQ(c.scenario.num_ids, 22);
}

TEST(Config, OverridesAndTypos) {
  const auto c = trackforge::parse_config(R"({"tracker":{"proximity_threshold":0.4},
      "refine":{"eps":0.3,"min_samples":5,"target_count":22},
      "metrics":{"alpha_grid":[0.25,0.5]},
      "scenario":{"seed":9,"confusable_pairs":[[1,2]]}})");
  EXPECT_DOUBLE_EQ(c.tracker.proximity_threshold, 0.4);
  EXPECT_DOUBLE_EQ(c.tracker.lambda, 0.5);
  EXPECT_DOUBLE_EQ(c.refine.eps, 0.3);
  EXPECT_EQ(c.refine.min_samples, 5);
  EXPECT_EQ(c.refine.target_count, std::optional<std::size_t>(22));
  EXPECT_EQ(c.metrics.alpha_grid, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(c.scenario.seed, 9u);
  ASSERT_EQ(c.scenario.confusable_pairs.size(), 1u);

  for (const char* bad : {R"({"tracker":{"proximty_threshold":0.9}})", R"({"trackr":{}})",
                          R"({"tracker":{"n_init":"three"}})", R"({"tracker":{"conf_low":0.9}})",
                          R"({"metrics":{"alpha_grid":[1.5]}})", "{not json", "[1,2]"}) {
    EXPECT_EQ(kind_of([&] { trackforge::parse_config(bad); }), ErrorKind::Config) << bad;
  }
}
