#include "trackforge/online_tracker.hpp"

#include <algorithm>
#include <string>

#include "trackforge/assignment.hpp"
#include "trackforge/error.hpp"

namespace trackforge {

void validate(const TrackerConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "tracker." + msg); };
  if (!(c.conf_low >= 0.0 && c.conf_low <= 1.0)) fail("conf_low must lie in [0, 1]");
  if (!(c.conf_high >= 0.0 && c.conf_high <= 1.0)) fail("conf_high must lie in [0, 1]");
  if (!(c.conf_low < c.conf_high)) fail("conf_low must be below conf_high");
  if (!(c.proximity_threshold > 0.0 && c.proximity_threshold <= 1.0)) {
    fail("proximity_threshold must lie in (0, 1]");
  }
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) fail("lambda must lie in [0, 1]");
  if (c.expansion_schedule.empty()) fail("expansion_schedule must not be empty");
  for (std::size_t i = 0; i < c.expansion_schedule.size(); ++i) {
    if (!(c.expansion_schedule[i] >= 0.0)) fail("expansion_schedule entries must be >= 0");
    if (i > 0 && !(c.expansion_schedule[i] > c.expansion_schedule[i - 1])) {
      fail("expansion_schedule must be strictly increasing");
    }
  }
  if (c.n_init < 1) fail("n_init must be >= 1");
  if (c.max_age < 0) fail("max_age must be >= 0");
  if (!(c.appearance_reject > 0.0 && c.appearance_reject <= 2.0)) {
    fail("appearance_reject must lie in (0, 2]");
  }
  if (!(c.momentum >= 0.0 && c.momentum <= 1.0)) fail("momentum must lie in [0, 1]");
}

OnlineTracker::OnlineTracker(TrackerConfig config) : config_(std::move(config)) {
  validate(config_);
}

OnlineTracker::Pairs OnlineTracker::match_fused(const std::vector<std::size_t>& track_ids,
                                                const std::vector<std::size_t>& det_ids,
                                                std::span<const Detection> detections,
                                                const std::vector<const Embedding*>& features,
                                                double scale) const {
  if (track_ids.empty() || det_ids.empty()) return {};
  CostMatrix spatial(track_ids.size(), det_ids.size());
  CostMatrix appearance(track_ids.size(), det_ids.size());
  for (std::size_t r = 0; r < track_ids.size(); ++r) {
    const Track& t = tracks_[track_ids[r]];
    for (std::size_t c = 0; c < det_ids.size(); ++c) {
      const std::size_t d = det_ids[c];
      spatial.set_cost(r, c, std::clamp(1.0 - eiou(t.last_box, detections[d].box, scale), 0.0, 1.0));
      appearance.set_cost(r, c, std::clamp(cosine_distance(t.bank.current, *features[d]), 0.0, 2.0));
    }
  }
  const CostMatrix fused = fuse(gate_spatial(spatial, config_.proximity_threshold),
                                gate_above(appearance, config_.appearance_reject), config_.lambda);
  Pairs out;
  for (const auto& [r, c] : solve(fused).pairs) out.emplace_back(track_ids[r], det_ids[c]);
  return out;
}

OnlineTracker::Pairs OnlineTracker::match_spatial(const std::vector<std::size_t>& track_ids,
                                                  const std::vector<std::size_t>& det_ids,
                                                  std::span<const Detection> detections,
                                                  double scale) const {
  if (track_ids.empty() || det_ids.empty()) return {};
  CostMatrix spatial(track_ids.size(), det_ids.size());
  for (std::size_t r = 0; r < track_ids.size(); ++r) {
    for (std::size_t c = 0; c < det_ids.size(); ++c) {
      const double e = eiou(tracks_[track_ids[r]].last_box, detections[det_ids[c]].box, scale);
      spatial.set_cost(r, c, std::clamp(1.0 - e, 0.0, 1.0));
    }
  }
  Pairs out;
  for (const auto& [r, c] : solve(gate_spatial(spatial, config_.proximity_threshold)).pairs) {
    out.emplace_back(track_ids[r], det_ids[c]);
  }
  return out;
}

void OnlineTracker::commit(Track& track, int frame, const Detection& det,
                           const Embedding* feature) {
  track.records.push_back(TrackRecord{frame, det.box, det.confidence});
  track.last_box = det.box;
  track.last_frame = frame;
  track.hits += 1;
  track.misses = 0;
  if (feature != nullptr) {
    const double momentum = config_.use_ema ? config_.momentum : 0.0;
    track.bank = bank_update(std::move(track.bank), frame, *feature, momentum, config_.max_history);
    track.embeddings.push_back(FramedEmbedding{frame, *feature});
  }
  if (track.state == TrackState::Lost) {
    track.state = track.confirmed ? TrackState::Active : TrackState::Tentative;
  }
  if (track.state == TrackState::Tentative && track.hits >= config_.n_init) {
    track.state = TrackState::Active;
    track.confirmed = true;
  }
}

StepResult OnlineTracker::step(int frame, std::span<const Detection> detections,
                               const EmbeddingTable& embeddings) {
  if (last_frame_ && frame <= *last_frame_) {
    throw Error(ErrorKind::Sequencing, "frame " + std::to_string(frame) +
                                           " does not follow frame " +
                                           std::to_string(*last_frame_));
  }
  for (const auto& d : detections) {
    if (d.frame != frame) {
      throw Error(ErrorKind::Sequencing, "detection for frame " + std::to_string(d.frame) +
                                             " passed to step for frame " + std::to_string(frame));
    }
    validate(d.box);
  }
  last_frame_ = frame;

  std::vector<std::size_t> high, low;
  std::vector<const Embedding*> features(detections.size(), nullptr);
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const double conf = detections[i].confidence;
    if (conf >= config_.conf_high) {
      high.push_back(i);
      features[i] = &embeddings.at(detections[i].embedding_index);
      if (features[i]->dim() != embeddings.dim()) {
        throw Error(ErrorKind::Data, "embedding dimension mismatch");
      }
    } else if (conf >= config_.conf_low) {
      low.push_back(i);
    }
  }

  std::vector<std::size_t> established, tentative;
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    switch (tracks_[t].state) {
      case TrackState::Active:
      case TrackState::Lost: established.push_back(t); break;
      case TrackState::Tentative: tentative.push_back(t); break;
      case TrackState::Removed: break;
    }
  }

  StepResult result;
  std::vector<char> track_matched(tracks_.size(), 0);
  auto take = [&](const Pairs& pairs, MatchStage stage, double scale,
                  std::vector<std::size_t>& track_pool, std::vector<std::size_t>& det_pool) {
    for (const auto& [t, d] : pairs) {
      const Embedding* feature = stage == MatchStage::LowConfidence ? nullptr : features[d];
      commit(tracks_[t], frame, detections[d], feature);
      track_matched[t] = 1;
      result.matches.push_back(FrameMatch{tracks_[t].id, d, stage, scale});
      std::erase(track_pool, t);
      std::erase(det_pool, d);
    }
  };

  // Established tracks against confident detections, widening the boxes
  // step by step so that nearby pairs lock in before distant ones compete.
  for (double scale : config_.expansion_schedule) {
    take(match_fused(established, high, detections, features, scale), MatchStage::Appearance,
         scale, established, high);
  }
  for (double scale : config_.expansion_schedule) {
    take(match_fused(tentative, high, detections, features, scale), MatchStage::Tentative, scale,
         tentative, high);
  }

  // Low-confidence detections may only extend tracks that were active going
  // into this frame; they never touch feature banks.
  std::vector<std::size_t> active_left;
  for (std::size_t t : established) {
    if (tracks_[t].state == TrackState::Active) active_left.push_back(t);
  }
  const double first_scale = config_.expansion_schedule.front();
  take(match_spatial(active_left, low, detections, first_scale), MatchStage::LowConfidence,
       first_scale, active_left, low);

  for (std::size_t t = 0; t < track_matched.size(); ++t) {
    Track& track = tracks_[t];
    if (track_matched[t] || track.state == TrackState::Removed) continue;
    track.misses += 1;
    track.hits = 0;
    if (track.state == TrackState::Lost) {
      if (track.misses > config_.max_age) track.state = TrackState::Removed;
    } else {
      track.state = TrackState::Lost;
    }
  }

  for (std::size_t d : high) {
    Track track;
    track.id = next_id_++;
    track.state = TrackState::Tentative;
    track.last_box = detections[d].box;
    track.last_frame = frame;
    track.hits = 1;
    track.records.push_back(TrackRecord{frame, detections[d].box, detections[d].confidence});
    track.bank = make_bank(frame, *features[d]);
    track.embeddings.push_back(FramedEmbedding{frame, *features[d]});
    if (track.hits >= config_.n_init) {
      track.state = TrackState::Active;
      track.confirmed = true;
    }
    result.spawned.emplace_back(track.id, d);
    tracks_.push_back(std::move(track));
  }
  return result;
}

TrackSet OnlineTracker::result() const {
  TrackSet out;
  for (const auto& t : tracks_) {
    if (!t.confirmed) continue;
    out.tracklets.push_back(Tracklet{t.id, t.records, t.embeddings});
  }
  out.sort_by_id();
  return out;
}

TrackSet run(const SequenceBundle& bundle, const TrackerConfig& config) {
  OnlineTracker tracker(config);
  for (int f = 1; f <= bundle.frame_count; ++f) {
    tracker.step(f, bundle.frame(f), bundle.embeddings);
  }
  return tracker.result();
}

}  // namespace trackforge
