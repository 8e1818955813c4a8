#include "trackforge/sequence.hpp"

#include <algorithm>

#include "trackforge/error.hpp"

namespace trackforge {

EmbeddingTable::EmbeddingTable(std::size_t dim, std::vector<Embedding> rows)
    : dim_(dim), rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.dim() != dim_) {
      throw Error(ErrorKind::DimensionMismatch, "embedding table rows must share one dimension");
    }
  }
}

const Embedding& EmbeddingTable::at(std::size_t index) const {
  if (index >= rows_.size()) {
    throw Error(ErrorKind::Data, "embedding index " + std::to_string(index) +
                                     " out of range (table has " +
                                     std::to_string(rows_.size()) + " rows)");
  }
  return rows_[index];
}

std::span<const Detection> SequenceBundle::frame(int frame_index) const {
  auto lo = std::lower_bound(detections.begin(), detections.end(), frame_index,
                             [](const Detection& d, int f) { return d.frame < f; });
  auto hi = std::upper_bound(lo, detections.end(), frame_index,
                             [](int f, const Detection& d) { return f < d.frame; });
  return {detections.data() + (lo - detections.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace trackforge
