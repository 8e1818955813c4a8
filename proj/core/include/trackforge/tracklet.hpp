#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "trackforge/appearance.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

struct TrackRecord {
  int frame = 0;
  BoundingBox box;
  double confidence = 1.0;
};

// One identity hypothesis: frame-ordered records plus the appearance
// features banked along the way (a subset of the record frames).
struct Tracklet {
  int id = 0;
  std::vector<TrackRecord> records;
  std::vector<FramedEmbedding> embeddings;

  int first_frame() const { return records.front().frame; }
  int last_frame() const { return records.back().frame; }
  std::size_t size() const { return records.size(); }
};

// Throws Error(Data) if the tracklet breaks its ordering invariants.
void validate(const Tracklet& t);

// Number of frames in which both tracklets hold a record.
int temporal_overlap(const Tracklet& a, const Tracklet& b);

// A full tracking result for one sequence, ordered by id.
struct TrackSet {
  std::vector<Tracklet> tracklets;

  std::size_t record_count() const;
  int max_id() const;
  void sort_by_id();
};

}  // namespace trackforge
