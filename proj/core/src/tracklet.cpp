#include "trackforge/tracklet.hpp"

#include <algorithm>
#include <string>

#include "trackforge/error.hpp"

namespace trackforge {

void validate(const Tracklet& t) {
  const std::string who = "tracklet " + std::to_string(t.id);
  if (t.id <= 0) throw Error(ErrorKind::Data, who + ": id must be positive");
  if (t.records.empty()) throw Error(ErrorKind::Data, who + ": has no records");
  for (std::size_t i = 1; i < t.records.size(); ++i) {
    if (t.records[i].frame <= t.records[i - 1].frame) {
      throw Error(ErrorKind::Data, who + ": record frames are not strictly increasing");
    }
  }
  for (std::size_t i = 1; i < t.embeddings.size(); ++i) {
    if (t.embeddings[i].frame <= t.embeddings[i - 1].frame) {
      throw Error(ErrorKind::Data, who + ": embedding frames are not strictly increasing");
    }
  }
  std::size_t r = 0;
  for (const auto& e : t.embeddings) {
    while (r < t.records.size() && t.records[r].frame < e.frame) ++r;
    if (r == t.records.size() || t.records[r].frame != e.frame) {
      throw Error(ErrorKind::Data, who + ": embedding at frame " + std::to_string(e.frame) +
                                       " has no matching record");
    }
  }
}

int temporal_overlap(const Tracklet& a, const Tracklet& b) {
  if (a.last_frame() < b.first_frame() || b.last_frame() < a.first_frame()) return 0;
  int shared = 0;
  std::size_t i = 0, j = 0;
  while (i < a.records.size() && j < b.records.size()) {
    if (a.records[i].frame < b.records[j].frame) {
      ++i;
    } else if (b.records[j].frame < a.records[i].frame) {
      ++j;
    } else {
      ++shared;
      ++i;
      ++j;
    }
  }
  return shared;
}

std::size_t TrackSet::record_count() const {
  std::size_t n = 0;
  for (const auto& t : tracklets) n += t.records.size();
  return n;
}

int TrackSet::max_id() const {
  int m = 0;
  for (const auto& t : tracklets) m = std::max(m, t.id);
  return m;
}

void TrackSet::sort_by_id() {
  std::sort(tracklets.begin(), tracklets.end(),
            [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
}

}  // namespace trackforge
