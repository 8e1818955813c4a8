#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "trackforge/appearance.hpp"
#include "trackforge/tracklet.hpp"

namespace trackforge {

struct RefineConfig {
  // Density radius on cosine distance, and neighbourhood size (self
  // included) that makes a point a core point.
  double eps = 0.5;
  int min_samples = 7;
  // Largest mean pairwise distance at which two tracklets are joined.
  double merge_threshold = 0.4;
  int max_temporal_overlap = 0;
  // Keep joining the closest compatible pair while more tracklets remain.
  std::optional<std::size_t> target_count;
  bool enable_split = true;
  // Largest centre displacement per frame of gap a join may bridge (px).
  double max_speed = 50.0;
  // Embeddings per tracklet entering a pairwise distance; longer histories
  // are subsampled at even stride. 0 = use all.
  std::size_t max_history = 30;
};

void validate(const RefineConfig& config);

constexpr int kNoise = -1;

// Density clustering under cosine distance. Labels are 0..k-1 in order of
// each cluster's lowest-index core point; kNoise marks unclustered points.
std::vector<int> dbscan(std::span<const Embedding> points, double eps, int min_samples);

// Breaks a tracklet whose features form several density clusters into one
// tracklet per cluster. Records without their own feature, and noise
// features, follow the temporally nearest clustered feature. Pieces are
// ordered by first frame and take ids from `next_id`. A tracklet with at
// most one cluster comes back unchanged.
std::vector<Tracklet> split_tracklet(const Tracklet& t, const RefineConfig& config, int& next_id);

enum class MergeCriterion { Threshold, TargetCount };

struct MergeEvent {
  int kept_id = 0;
  int absorbed_id = 0;
  double distance = 0.0;
  MergeCriterion criterion = MergeCriterion::Threshold;
};

// True when the pair may be joined: at most max_temporal_overlap frames
// hold records of both, and every hand-over between the two in frame order
// is reachable at max_speed.
bool can_connect(const Tracklet& a, const Tracklet& b, const RefineConfig& config);

// Mean pairwise cosine distance over the (subsampled) feature histories.
double connection_distance(const Tracklet& a, const Tracklet& b, const RefineConfig& config);

// Joins `later` into `earlier`; records and features are interleaved by
// frame. With overlapping spans, the more confident record of a shared
// frame is kept.
Tracklet join(const Tracklet& earlier, const Tracklet& later);

struct ConnectResult {
  std::vector<Tracklet> tracklets;
  std::vector<MergeEvent> merges;
};

// Greedy agglomeration: repeatedly joins the compatible pair with the
// smallest distance, ties broken by (smaller id, larger id), until no pair
// qualifies. Tracklets without features are passed through untouched.
ConnectResult connect_tracklets(std::vector<Tracklet> tracklets, const RefineConfig& config);

struct RefineResult {
  TrackSet tracks;
  std::size_t input_count = 0;
  std::size_t after_split = 0;
  std::size_t after_connect = 0;
  std::vector<MergeEvent> merges;
};

RefineResult refine(const TrackSet& input, const RefineConfig& config);

}  // namespace trackforge
