#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "trackforge/appearance.hpp"
#include "trackforge/geometry.hpp"

namespace trackforge {

struct Detection {
  int frame = 0;
  BoundingBox box;
  double confidence = 0.0;
  // Row in the sequence's embedding table (detection-file line order).
  std::size_t embedding_index = 0;
};

// Row-normalized appearance features, one row per detection line.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim, std::vector<Embedding> rows);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  // Throws Error(Data) for an out-of-range index.
  const Embedding& at(std::size_t index) const;

 private:
  std::size_t dim_ = 0;
  std::vector<Embedding> rows_;
};

// All detections of one sequence, sorted by frame (stable within a frame),
// together with their embedding table.
struct SequenceBundle {
  std::vector<Detection> detections;
  EmbeddingTable embeddings;
  int frame_count = 0;
  std::string detections_path;
  std::string embeddings_path;

  // Detections of one frame as a contiguous slice.
  std::span<const Detection> frame(int frame_index) const;
};

}  // namespace trackforge
