#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "trackforge/appearance.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/sequence.hpp"
#include "trackforge/tracklet.hpp"

namespace trackforge {

struct TrackerConfig {
  double conf_high = 0.6;
  double conf_low = 0.1;
  // Largest spatial cost (1 - EIoU) a pairing may have; 1.0 disables the gate.
  double proximity_threshold = 0.9;
  // Weight of the spatial term in the fused cost.
  double lambda = 0.5;
  std::vector<double> expansion_schedule{0.7, 1.0, 1.3};
  int n_init = 3;
  int max_age = 30;
  // Raw cosine distance above which a pairing is rejected, on [0, 2].
  double appearance_reject = 0.5;

  // Feature bank maintenance.
  bool use_ema = true;
  double momentum = 0.9;
  std::size_t max_history = 30;
};

// Throws Error(Config) describing the first invalid field.
void validate(const TrackerConfig& config);

enum class TrackState { Tentative, Active, Lost, Removed };

struct Track {
  int id = 0;
  TrackState state = TrackState::Tentative;
  bool confirmed = false;
  BoundingBox last_box;
  int last_frame = 0;
  int hits = 0;
  int misses = 0;
  FeatureBank bank;
  std::vector<TrackRecord> records;
  // Every feature banked over the track's life; bank.history is the capped view.
  std::vector<FramedEmbedding> embeddings;
};

enum class MatchStage { Appearance, Tentative, LowConfidence };

struct FrameMatch {
  int track_id = 0;
  // Index into the frame's detection slice.
  std::size_t detection = 0;
  MatchStage stage = MatchStage::Appearance;
  // Expansion scale in effect when the pair was committed.
  double scale = 0.0;
};

struct StepResult {
  std::vector<FrameMatch> matches;
  // (track id, detection index) of tracks spawned this frame.
  std::vector<std::pair<int, std::size_t>> spawned;
};

// Motion-free online tracker. Association at frame t depends only on each
// track's last box, its feature bank and the frame-t detections.
class OnlineTracker {
 public:
  explicit OnlineTracker(TrackerConfig config);

  // Detections must all carry `frame`, which must exceed every earlier
  // stepped frame.
  StepResult step(int frame, std::span<const Detection> detections,
                  const EmbeddingTable& embeddings);

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return config_; }
  std::optional<int> last_frame() const { return last_frame_; }

  // Every track that ever reached the active state, ordered by id.
  TrackSet result() const;

 private:
  using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

  Pairs match_fused(const std::vector<std::size_t>& track_ids,
                    const std::vector<std::size_t>& det_ids,
                    std::span<const Detection> detections,
                    const std::vector<const Embedding*>& features, double scale) const;
  Pairs match_spatial(const std::vector<std::size_t>& track_ids,
                      const std::vector<std::size_t>& det_ids,
                      std::span<const Detection> detections, double scale) const;
  void commit(Track& track, int frame, const Detection& det, const Embedding* feature);

  TrackerConfig config_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

// Steps every frame from 1 to bundle.frame_count (empty frames included).
TrackSet run(const SequenceBundle& bundle, const TrackerConfig& config);

}  // namespace trackforge
