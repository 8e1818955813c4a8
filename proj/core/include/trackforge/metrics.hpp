#pragma once

#include <cstddef>
#include <vector>

#include "trackforge/geometry.hpp"
#include "trackforge/tracklet.hpp"

namespace trackforge {

struct LabeledBox {
  int frame = 0;
  int id = 0;
  BoundingBox box;
};

// Annotated boxes of one sequence, at most one per (frame, id).
struct GroundTruth {
  std::vector<LabeledBox> boxes;
};

// Throws Error(Data) on non-positive ids or a repeated (frame, id).
void validate(const GroundTruth& gt);

// Flattens a track set into labelled boxes (track id as label).
std::vector<LabeledBox> to_labeled(const TrackSet& tracks);
GroundTruth to_ground_truth(const TrackSet& tracks);

// 0.05, 0.10, ..., 0.95.
std::vector<double> default_alpha_grid();

struct MetricOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  // IoU threshold of the CLEAR-style identity-switch matching.
  double clear_threshold = 0.5;
};

void validate(const MetricOptions& options);

struct MatchedPair {
  int frame = 0;
  int gt_id = 0;
  int pred_id = 0;
  double iou = 0.0;
};

struct AlphaMatching {
  double alpha = 0.0;
  std::vector<MatchedPair> tp;
  std::vector<LabeledBox> fn;
  std::vector<LabeledBox> fp;
};

// Per-frame one-to-one matching restricted to pairs with IoU >= alpha.
// A first pass over all overlapping pairs scores how strongly each
// (gt id, pred id) pair co-occurs; each frame then takes the assignment
// maximizing the sum of (co-occurrence score x IoU).
AlphaMatching match_per_alpha(const GroundTruth& gt, const TrackSet& pred, double alpha);

// |TP| / (|TP| + |FN| + |FP|); an empty scene scores 1.
double det_a(std::size_t tp, std::size_t fn, std::size_t fp);
// Mean over TP pairs of TPA / (TPA + FNA + FPA) for the pair's id couple.
double ass_a(const AlphaMatching& m);
// Mean IoU over TP pairs; 0 when there are none.
double loc_a(const AlphaMatching& m);

struct AlphaScores {
  double alpha = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  double hota = 0.0;
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
};

struct MetricReport {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  long idsw = 0;
  long fp = 0;
  long fn = 0;
  std::vector<AlphaScores> per_alpha;
  // Set when neither side holds a single box and the empty-scene
  // convention produced the scores.
  bool empty_scene = false;
};

MetricReport hota(const GroundTruth& gt, const TrackSet& pred, const MetricOptions& options = {});

// CLEAR-style identity switches: per-frame matching at IoU >= threshold
// that prefers each gt's match from the previous frame; a switch is a gt
// whose matched pred id differs from its last matched pred id.
long idsw(const GroundTruth& gt, const TrackSet& pred, double threshold = 0.5);

// Element-wise mean over sequences; counts become real-valued means.
struct MeanReport {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  double idsw = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

MeanReport mean_of(const std::vector<MetricReport>& reports);

}  // namespace trackforge
