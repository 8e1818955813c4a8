#include "trackforge/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>

#include "trackforge/error.hpp"
#include "trackforge/parallel.hpp"

namespace trackforge {

void validate(const RefineConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "refine." + msg); };
  if (!(c.eps > 0.0)) fail("eps must be > 0");
  if (c.min_samples < 1) fail("min_samples must be >= 1");
  if (!(c.merge_threshold > 0.0)) fail("merge_threshold must be > 0");
  if (c.max_temporal_overlap < 0) fail("max_temporal_overlap must be >= 0");
  if (!(c.max_speed > 0.0)) fail("max_speed must be > 0");
  if (c.target_count && *c.target_count == 0) fail("target_count must be >= 1");
}

std::vector<int> dbscan(std::span<const Embedding> points, double eps, int min_samples) {
  constexpr int kUnvisited = -2;
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> neighbours(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (cosine_distance(points[i], points[j]) <= eps) neighbours[i].push_back(j);
    }
  });
  auto is_core = [&](std::size_t i) {
    return neighbours[i].size() >= static_cast<std::size_t>(min_samples);
  };

  std::vector<int> labels(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    if (!is_core(i)) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    std::vector<std::size_t> frontier = neighbours[i];
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      const std::size_t q = frontier[k];
      if (labels[q] == kNoise) labels[q] = cluster;
      if (labels[q] != kUnvisited) continue;
      labels[q] = cluster;
      if (is_core(q)) frontier.insert(frontier.end(), neighbours[q].begin(), neighbours[q].end());
    }
    ++cluster;
  }
  return labels;
}

namespace {

// Index of the element of `frames` (sorted) closest to `frame`, among those
// with an accepted label; ties go to the earlier frame.
std::size_t nearest_labelled(const std::vector<int>& frames, const std::vector<int>& labels,
                             int frame) {
  std::size_t best = frames.size();
  long best_gap = std::numeric_limits<long>::max();
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (labels[j] == kNoise) continue;
    const long gap = std::labs(static_cast<long>(frames[j]) - frame);
    if (gap < best_gap) {
      best_gap = gap;
      best = j;
    }
  }
  return best;
}

}  // namespace

std::vector<Tracklet> split_tracklet(const Tracklet& t, const RefineConfig& config, int& next_id) {
  if (t.embeddings.empty()) return {t};
  std::vector<Embedding> points;
  std::vector<int> frames;
  points.reserve(t.embeddings.size());
  for (const auto& fe : t.embeddings) {
    points.push_back(fe.embedding);
    frames.push_back(fe.frame);
  }
  const std::vector<int> labels = dbscan(points, config.eps, config.min_samples);
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  if (clusters <= 1) return {t};

  std::vector<int> resolved = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kNoise) resolved[i] = labels[nearest_labelled(frames, labels, frames[i])];
  }

  std::vector<Tracklet> pieces(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < t.embeddings.size(); ++i) {
    pieces[static_cast<std::size_t>(resolved[i])].embeddings.push_back(t.embeddings[i]);
  }
  for (const auto& rec : t.records) {
    const std::size_t j = nearest_labelled(frames, resolved, rec.frame);
    pieces[static_cast<std::size_t>(resolved[j])].records.push_back(rec);
  }
  std::erase_if(pieces, [](const Tracklet& p) { return p.records.empty(); });
  std::sort(pieces.begin(), pieces.end(), [](const Tracklet& a, const Tracklet& b) {
    return a.first_frame() < b.first_frame();
  });
  if (pieces.size() <= 1) return {t};
  for (auto& p : pieces) p.id = next_id++;
  return pieces;
}

bool can_connect(const Tracklet& a, const Tracklet& b, const RefineConfig& config) {
  if (temporal_overlap(a, b) > config.max_temporal_overlap) return false;
  // Walk both record lists in frame order; every hand-over from one
  // tracklet to the other must be reachable at max_speed.
  std::size_t i = 0, j = 0;
  const TrackRecord* prev = nullptr;
  int prev_src = -1;
  while (i < a.records.size() || j < b.records.size()) {
    const bool take_a = j == b.records.size() ||
                        (i < a.records.size() && a.records[i].frame <= b.records[j].frame);
    const TrackRecord& cur = take_a ? a.records[i++] : b.records[j++];
    const int src = take_a ? 0 : 1;
    if (prev != nullptr && src != prev_src && cur.frame != prev->frame) {
      const double dist = std::hypot(cur.box.center_x() - prev->box.center_x(),
                                     cur.box.center_y() - prev->box.center_y());
      if (dist > config.max_speed * (cur.frame - prev->frame)) return false;
    }
    prev = &cur;
    prev_src = src;
  }
  return true;
}

namespace {

std::vector<FramedEmbedding> subsample(const std::vector<FramedEmbedding>& h, std::size_t cap) {
  if (cap == 0 || h.size() <= cap) return h;
  std::vector<FramedEmbedding> out;
  out.reserve(cap);
  if (cap == 1) {
    out.push_back(h[h.size() / 2]);
    return out;
  }
  for (std::size_t i = 0; i < cap; ++i) {
    out.push_back(h[i * (h.size() - 1) / (cap - 1)]);
  }
  return out;
}

}  // namespace

double connection_distance(const Tracklet& a, const Tracklet& b, const RefineConfig& config) {
  return tracklet_distance(subsample(a.embeddings, config.max_history),
                           subsample(b.embeddings, config.max_history));
}

Tracklet join(const Tracklet& earlier, const Tracklet& later) {
  Tracklet out;
  out.id = earlier.id;
  // frame -> (record, source index)
  std::map<int, std::pair<TrackRecord, int>> records;
  const Tracklet* sources[2] = {&earlier, &later};
  for (int s = 0; s < 2; ++s) {
    for (const auto& r : sources[s]->records) {
      auto [it, inserted] = records.try_emplace(r.frame, r, s);
      if (!inserted && r.confidence > it->second.first.confidence) it->second = {r, s};
    }
  }
  std::map<int, FramedEmbedding> feats;
  for (int s = 0; s < 2; ++s) {
    for (const auto& fe : sources[s]->embeddings) {
      if (records.at(fe.frame).second == s) feats.emplace(fe.frame, fe);
    }
  }
  out.records.reserve(records.size());
  for (const auto& [f, rs] : records) out.records.push_back(rs.first);
  for (const auto& [f, e] : feats) out.embeddings.push_back(e);
  return out;
}

ConnectResult connect_tracklets(std::vector<Tracklet> tracklets, const RefineConfig& config) {
  validate(config);
  ConnectResult out;
  std::vector<Tracklet> idle;
  std::vector<Tracklet> live;
  for (auto& t : tracklets) (t.embeddings.empty() ? idle : live).push_back(std::move(t));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = live.size();
  std::vector<char> alive(n, 1);
  // NaN marks incompatible pairs.
  std::vector<double> dist(n * n, nan);
  auto pair_distance = [&](std::size_t i, std::size_t j) {
    return can_connect(live[i], live[j], config) ? connection_distance(live[i], live[j], config)
                                                 : nan;
  };
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = pair_distance(i, j);
  });

  std::size_t remaining = n + idle.size();
  for (;;) {
    const bool over_target = config.target_count && remaining > *config.target_count;
    std::size_t bi = n, bj = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        const double d = dist[i * n + j];
        if (std::isnan(d)) continue;
        if (d > config.merge_threshold && !over_target) continue;
        const int lo = std::min(live[i].id, live[j].id);
        const int hi = std::max(live[i].id, live[j].id);
        bool better = d < best;
        if (!better && d == best) {
          const int blo = std::min(live[bi].id, live[bj].id);
          const int bhi = std::max(live[bi].id, live[bj].id);
          better = lo < blo || (lo == blo && hi < bhi);
        }
        if (better) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi == n) break;

    const Tracklet& a = live[bi];
    const Tracklet& b = live[bj];
    const bool a_earlier = a.first_frame() < b.first_frame() ||
                           (a.first_frame() == b.first_frame() && a.id < b.id);
    const std::size_t keep = a_earlier ? bi : bj;
    const std::size_t drop = a_earlier ? bj : bi;
    out.merges.push_back(MergeEvent{live[keep].id, live[drop].id, best,
                                    best <= config.merge_threshold ? MergeCriterion::Threshold
                                                                   : MergeCriterion::TargetCount});
    live[keep] = join(live[keep], live[drop]);
    alive[drop] = 0;
    live[drop] = Tracklet{};
    --remaining;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == keep || !alive[k]) continue;
      const double d = pair_distance(std::min(k, keep), std::max(k, keep));
      dist[std::min(k, keep) * n + std::max(k, keep)] = d;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) out.tracklets.push_back(std::move(live[i]));
  }
  for (auto& t : idle) out.tracklets.push_back(std::move(t));
  std::sort(out.tracklets.begin(), out.tracklets.end(),
            [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
  return out;
}

RefineResult refine(const TrackSet& input, const RefineConfig& config) {
  validate(config);
  RefineResult res;
  res.input_count = input.tracklets.size();
  int next_id = input.max_id() + 1;
  std::vector<Tracklet> pieces;
  for (const auto& t : input.tracklets) {
    validate(t);
    if (!config.enable_split) {
      pieces.push_back(t);
      continue;
    }
    for (auto& p : split_tracklet(t, config, next_id)) pieces.push_back(std::move(p));
  }
  res.after_split = pieces.size();
  ConnectResult connected = connect_tracklets(std::move(pieces), config);
  res.after_connect = connected.tracklets.size();
  res.merges = std::move(connected.merges);
  res.tracks.tracklets = std::move(connected.tracklets);
  res.tracks.sort_by_id();
  return res;
}

}  // namespace trackforge
