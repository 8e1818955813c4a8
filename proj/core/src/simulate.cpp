#include "trackforge/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <string>

#include "trackforge/error.hpp"
#include "trackforge/io.hpp"

namespace trackforge {

namespace {

// Stream tags keep the per-identity noise, occlusion and clutter draws
// apart from the trajectory streams (which use the bare identity number).
constexpr std::uint64_t kDetectorStream = 0x1ULL << 40;
constexpr std::uint64_t kOcclusionStream = 0x2ULL << 40;
constexpr std::uint64_t kClutterStream = 0x3ULL << 40;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Mover {
  double cx, cy;
  double vx, vy;
  double base_w, aspect;
  double scale = 1.0;
};

void resample_velocity(Mover& m, const MotionModel& motion, Rng& rng) {
  const double speed = rng.uniform(motion.speed_min, motion.speed_max);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  m.vx = speed * std::cos(angle);
  m.vy = speed * std::sin(angle);
}

BoundingBox box_of(const Mover& m) {
  const double w = m.base_w * m.scale;
  const double h = w * m.aspect;
  return BoundingBox{quantize(m.cx - 0.5 * w), quantize(m.cy - 0.5 * h), quantize(w), quantize(h)};
}

// Mirrors a coordinate back into [lo, hi]; returns true when it bounced.
bool reflect(double& v, double lo, double hi) {
  bool bounced = false;
  for (int guard = 0; guard < 4 && (v < lo || v > hi); ++guard) {
    v = v < lo ? 2.0 * lo - v : 2.0 * hi - v;
    bounced = true;
  }
  v = std::clamp(v, lo, hi);
  return bounced;
}

std::vector<float> to_floats(const Embedding& e) {
  std::vector<float> out;
  out.reserve(e.dim());
  for (double v : e.values()) out.push_back(static_cast<float>(v));
  return out;
}

}  // namespace

double quantize(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return std::strtod(buf, nullptr);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(splitmix64(seed ^ stream)) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  // Box-Muller, one variate per call.
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  int k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

Embedding perturb(const Embedding& centre, double sigma, Rng& rng) {
  const auto c = centre.values();
  const double scale = sigma / std::sqrt(static_cast<double>(c.size()));
  std::vector<double> v(c.begin(), c.end());
  for (auto& x : v) x += scale * rng.normal();
  if (sigma == 0.0) return centre;
  return Embedding::normalize(std::span<const double>(v));
}

Embedding random_unit(std::size_t dim, Rng& rng) {
  std::vector<double> v(dim);
  for (;;) {
    for (auto& x : v) x = rng.normal();
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq > 1e-12) return Embedding::normalize(std::span<const double>(v));
  }
}

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "scenario." + msg); };
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) fail(std::string(name) + " must lie in [0, 1]");
  };
  if (c.num_ids < 1) fail("num_ids must be >= 1");
  if (c.frames < 1) fail("frames must be >= 1");
  if (c.embed_dim < 2) fail("embed_dim must be >= 2");
  if (!(c.field_width > 0.0 && c.field_height > 0.0)) fail("field size must be positive");
  if (!(c.motion.speed_min >= 0.0 && c.motion.speed_max >= c.motion.speed_min)) {
    fail("speed range must satisfy 0 <= speed_min <= speed_max");
  }
  prob(c.motion.turn_probability, "turn_probability");
  if (!(c.size.width_min > 0.0 && c.size.width_max >= c.size.width_min)) {
    fail("width range must satisfy 0 < width_min <= width_max");
  }
  if (!(c.size.aspect_min > 0.0 && c.size.aspect_max >= c.size.aspect_min)) {
    fail("aspect range must satisfy 0 < aspect_min <= aspect_max");
  }
  if (!(c.size.scale_drift >= 0.0)) fail("scale_drift must be >= 0");
  prob(c.detector.p_miss, "p_miss");
  if (!(c.detector.clutter_rate >= 0.0)) fail("clutter_rate must be >= 0");
  if (!(c.detector.jitter_sigma >= 0.0)) fail("jitter_sigma must be >= 0");
  if (!(c.detector.conf_sigma >= 0.0)) fail("conf_sigma must be >= 0");
  if (!(c.embedding_sigma >= 0.0)) fail("embedding_sigma must be >= 0");
  prob(c.occlusion.threshold, "occlusion_threshold");
  prob(c.occlusion.p_drop, "p_drop");
  for (const auto& [a, b] : c.confusable_pairs) {
    if (a < 1 || b < 1 || a > c.num_ids || b > c.num_ids || a == b) {
      fail("confusable_pairs entries must name two distinct identities in [1, num_ids]");
    }
  }
}

Scenario gen_scenario(const ScenarioConfig& config) {
  validate(config);
  constexpr double kMaxScale = 1.25;
  constexpr double kMinScale = 0.8;
  const double max_w = config.size.width_max * kMaxScale;
  const double max_h = max_w * config.size.aspect_max;
  if (max_w >= config.field_width || max_h >= config.field_height) {
    throw Error(ErrorKind::Generation, "field is smaller than the largest possible box");
  }
  const double mean_w = 0.5 * (config.size.width_min + config.size.width_max);
  const double mean_area = mean_w * mean_w * 0.5 * (config.size.aspect_min + config.size.aspect_max);
  if (config.num_ids * mean_area > 0.5 * config.field_width * config.field_height) {
    throw Error(ErrorKind::Generation, "field too small for " + std::to_string(config.num_ids) +
                                           " identities");
  }

  const std::size_t dim = static_cast<std::size_t>(config.embed_dim);
  const std::size_t n = static_cast<std::size_t>(config.num_ids);

  // Per-identity trajectory streams: identity k draws from seed ^ k only.
  std::vector<Rng> motion_rng;
  std::vector<Rng> detector_rng;
  std::vector<Embedding> centres;
  std::vector<Mover> movers;
  for (std::size_t k = 1; k <= n; ++k) {
    motion_rng.emplace_back(config.seed, k);
    detector_rng.emplace_back(config.seed, kDetectorStream | k);
    Rng& rng = motion_rng.back();
    centres.push_back(random_unit(dim, rng));
    Mover m{};
    m.base_w = rng.uniform(config.size.width_min, config.size.width_max);
    m.aspect = rng.uniform(config.size.aspect_min, config.size.aspect_max);
    const double w = m.base_w;
    const double h = w * m.aspect;
    m.cx = rng.uniform(0.5 * w, config.field_width - 0.5 * w);
    m.cy = rng.uniform(0.5 * h, config.field_height - 0.5 * h);
    resample_velocity(m, config.motion, rng);
    movers.push_back(m);
  }
  for (const auto& [a, b] : config.confusable_pairs) {
    centres[static_cast<std::size_t>(b - 1)] = centres[static_cast<std::size_t>(a - 1)];
  }
  Rng occlusion_rng(config.seed, kOcclusionStream);
  Rng clutter_rng(config.seed, kClutterStream);

  Scenario out;
  out.frame_count = config.frames;
  out.embed_dim = dim;
  std::vector<BoundingBox> boxes(n);
  std::vector<char> visible(n);
  for (int frame = 1; frame <= config.frames; ++frame) {
    if (frame > 1) {
      for (std::size_t k = 0; k < n; ++k) {
        Mover& m = movers[k];
        Rng& rng = motion_rng[k];
        if (rng.uniform() < config.motion.turn_probability) resample_velocity(m, config.motion, rng);
        m.scale = std::clamp(m.scale * std::exp(config.size.scale_drift * rng.normal()), kMinScale,
                             kMaxScale);
        const double w = m.base_w * m.scale;
        const double h = w * m.aspect;
        m.cx += m.vx;
        m.cy += m.vy;
        if (reflect(m.cx, 0.5 * w, config.field_width - 0.5 * w)) m.vx = -m.vx;
        if (reflect(m.cy, 0.5 * h, config.field_height - 0.5 * h)) m.vy = -m.vy;
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      boxes[k] = box_of(movers[k]);
      out.ground_truth.boxes.push_back(LabeledBox{frame, static_cast<int>(k + 1), boxes[k]});
    }

    std::fill(visible.begin(), visible.end(), 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double inter_w = std::min(boxes[i].right(), boxes[j].right()) -
                               std::max(boxes[i].x, boxes[j].x);
        const double inter_h = std::min(boxes[i].bottom(), boxes[j].bottom()) -
                               std::max(boxes[i].y, boxes[j].y);
        if (inter_w <= 0.0 || inter_h <= 0.0) continue;
        const std::size_t smaller = boxes[i].area() <= boxes[j].area() ? i : j;
        const double coverage = inter_w * inter_h / boxes[smaller].area();
        if (coverage <= config.occlusion.threshold) continue;
        if (occlusion_rng.uniform() < config.occlusion.p_drop) visible[smaller] = 0;
      }
    }

    for (std::size_t k = 0; k < n; ++k) {
      Rng& rng = detector_rng[k];
      const bool missed = rng.uniform() < config.detector.p_miss;
      BoundingBox b = boxes[k];
      const double s = config.detector.jitter_sigma;
      b.x += s * rng.normal();
      b.y += s * rng.normal();
      b.w = std::max(1.0, b.w + s * rng.normal());
      b.h = std::max(1.0, b.h + s * rng.normal());
      const double conf =
          std::clamp(1.0 - std::abs(config.detector.conf_sigma * rng.normal()), 0.01, 1.0);
      const Embedding feature = perturb(centres[k], config.embedding_sigma, rng);
      if (!visible[k] || missed) continue;
      b = BoundingBox{quantize(b.x), quantize(b.y), quantize(b.w), quantize(b.h)};
      out.detections.push_back(Detection{frame, b, quantize(conf), out.detections.size()});
      out.detection_source.push_back(static_cast<int>(k + 1));
      out.features.push_back(to_floats(feature));
    }

    const int clutter = clutter_rng.poisson(config.detector.clutter_rate);
    for (int c = 0; c < clutter; ++c) {
      const double w = clutter_rng.uniform(config.size.width_min, config.size.width_max);
      const double h = w * clutter_rng.uniform(config.size.aspect_min, config.size.aspect_max);
      const double x = clutter_rng.uniform(0.0, config.field_width - w);
      const double y = clutter_rng.uniform(0.0, config.field_height - h);
      const double conf = clutter_rng.uniform(0.05, 0.45);
      const Embedding feature = random_unit(dim, clutter_rng);
      out.detections.push_back(Detection{frame,
                                         BoundingBox{quantize(x), quantize(y), quantize(w),
                                                     quantize(h)},
                                         quantize(conf), out.detections.size()});
      out.detection_source.push_back(0);
      out.features.push_back(to_floats(feature));
    }
  }
  return out;
}

SequenceBundle to_bundle(const Scenario& scenario) {
  SequenceBundle b;
  b.detections = scenario.detections;
  std::vector<Embedding> rows;
  rows.reserve(scenario.features.size());
  for (const auto& f : scenario.features) rows.push_back(Embedding::normalize(std::span<const float>(f)));
  b.embeddings = EmbeddingTable(scenario.embed_dim, std::move(rows));
  b.frame_count = scenario.detections.empty() ? 0 : scenario.detections.back().frame;
  return b;
}

void write_scenario(const Scenario& scenario, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  write_ground_truth(scenario.ground_truth, dir / "gt.txt");
  write_detections(dir / "det.txt", scenario.detections);
  write_embedding_rows(dir / "emb.bin", scenario.embed_dim, scenario.features);
}

TrackSet oracle_tracks(const Scenario& scenario) {
  std::map<int, Tracklet> by_id;
  for (std::size_t i = 0; i < scenario.detections.size(); ++i) {
    const int id = scenario.detection_source[i];
    if (id == 0) continue;
    const Detection& d = scenario.detections[i];
    Tracklet& t = by_id[id];
    t.id = id;
    t.records.push_back(TrackRecord{d.frame, d.box, d.confidence});
    t.embeddings.push_back(
        FramedEmbedding{d.frame, Embedding::normalize(std::span<const float>(scenario.features[i]))});
  }
  TrackSet out;
  for (auto& [id, t] : by_id) out.tracklets.push_back(std::move(t));
  return out;
}

std::pair<TrackSet, std::vector<CutLog>> inject_cuts(const TrackSet& tracks,
                                                     const std::vector<CutSpec>& cuts) {
  TrackSet out = tracks;
  std::vector<CutLog> log;
  std::map<int, int> root;  // fragment id -> original id
  for (const auto& t : out.tracklets) root[t.id] = t.id;
  int next_id = out.max_id() + 1;
  for (const auto& cut : cuts) {
    auto it = std::find_if(out.tracklets.begin(), out.tracklets.end(), [&](const Tracklet& t) {
      return root.count(t.id) && root[t.id] == cut.tracklet_id && t.first_frame() < cut.frame &&
             t.last_frame() >= cut.frame;
    });
    if (it == out.tracklets.end()) {
      throw Error(ErrorKind::InvalidParameter,
                  "cut at frame " + std::to_string(cut.frame) + " of tracklet " +
                      std::to_string(cut.tracklet_id) + " leaves an empty side");
    }
    Tracklet tail;
    tail.id = next_id++;
    auto split_rec = std::lower_bound(it->records.begin(), it->records.end(), cut.frame,
                                      [](const TrackRecord& r, int f) { return r.frame < f; });
    tail.records.assign(split_rec, it->records.end());
    it->records.erase(split_rec, it->records.end());
    auto split_emb = std::lower_bound(it->embeddings.begin(), it->embeddings.end(), cut.frame,
                                      [](const FramedEmbedding& e, int f) { return e.frame < f; });
    tail.embeddings.assign(split_emb, it->embeddings.end());
    it->embeddings.erase(split_emb, it->embeddings.end());
    root[tail.id] = cut.tracklet_id;
    log.push_back(CutLog{cut.tracklet_id, tail.id, cut.frame});
    out.tracklets.push_back(std::move(tail));
  }
  out.sort_by_id();
  return {std::move(out), std::move(log)};
}

std::pair<TrackSet, std::vector<SwapLog>> inject_id_swaps(const TrackSet& tracks,
                                                          const std::vector<SwapSpec>& swaps) {
  TrackSet out = tracks;
  std::vector<SwapLog> log;
  auto find = [&](int id) -> Tracklet& {
    for (auto& t : out.tracklets) {
      if (t.id == id) return t;
    }
    throw Error(ErrorKind::InvalidParameter, "no tracklet with id " + std::to_string(id));
  };
  for (const auto& s : swaps) {
    Tracklet& a = find(s.id_a);
    Tracklet& b = find(s.id_b);
    auto tail = [&](Tracklet& t) {
      auto r = std::lower_bound(t.records.begin(), t.records.end(), s.frame,
                                [](const TrackRecord& x, int f) { return x.frame < f; });
      auto e = std::lower_bound(t.embeddings.begin(), t.embeddings.end(), s.frame,
                                [](const FramedEmbedding& x, int f) { return x.frame < f; });
      std::pair<std::vector<TrackRecord>, std::vector<FramedEmbedding>> cut{
          {r, t.records.end()}, {e, t.embeddings.end()}};
      const bool had_head = r != t.records.begin();
      t.records.erase(r, t.records.end());
      t.embeddings.erase(e, t.embeddings.end());
      return std::make_pair(std::move(cut), had_head);
    };
    auto [tail_a, head_a] = tail(a);
    auto [tail_b, head_b] = tail(b);
    int expected = 0;
    if (head_a && !tail_a.first.empty()) ++expected;
    if (head_b && !tail_b.first.empty()) ++expected;
    a.records.insert(a.records.end(), tail_b.first.begin(), tail_b.first.end());
    a.embeddings.insert(a.embeddings.end(), tail_b.second.begin(), tail_b.second.end());
    b.records.insert(b.records.end(), tail_a.first.begin(), tail_a.first.end());
    b.embeddings.insert(b.embeddings.end(), tail_a.second.begin(), tail_a.second.end());
    log.push_back(SwapLog{s.id_a, s.id_b, s.frame, expected});
  }
  std::erase_if(out.tracklets, [](const Tracklet& t) { return t.records.empty(); });
  return {std::move(out), std::move(log)};
}

}  // namespace trackforge
