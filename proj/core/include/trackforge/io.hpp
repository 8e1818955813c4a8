#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trackforge/metrics.hpp"
#include "trackforge/online_tracker.hpp"
#include "trackforge/refinement.hpp"
#include "trackforge/sequence.hpp"
#include "trackforge/simulate.hpp"
#include "trackforge/tracklet.hpp"

namespace trackforge {

// Non-fatal diagnostics (e.g. an empty input file). Defaults to stderr.
void set_warning_handler(std::function<void(std::string_view)> handler);
void warn(std::string_view message);

// MOT detection lines `frame,id,x,y,w,h,conf[,...]`. embedding_index is
// the data-line ordinal; the result is sorted by frame, stable within a
// frame. Throws Error(Parse) naming the offending line.
std::vector<Detection> parse_detections(std::istream& in, const std::string& source);
std::vector<Detection> read_detections(const std::filesystem::path& path);

// Raw feature rows of an EMB1 file: "EMB1", u32 version (1), u32 count,
// u32 dim, then count * dim little-endian float32 values, row-major.
struct RawEmbeddings {
  std::size_t dim = 0;
  std::vector<std::vector<float>> rows;
};

RawEmbeddings read_embedding_rows(const std::filesystem::path& path);
void write_embedding_rows(const std::filesystem::path& path, std::size_t dim,
                          const std::vector<std::vector<float>>& rows);

// Normalized table; the row count must equal expected_count.
EmbeddingTable read_embeddings(const std::filesystem::path& path, std::size_t expected_count);

// Detections plus their feature table, with the row/line correspondence
// verified before anything else runs.
SequenceBundle load_sequence(const std::filesystem::path& detections,
                             const std::filesystem::path& embeddings);

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets);

// MOT track lines `frame,id,x,y,w,h,conf,-1,-1,-1` sorted by (frame, id),
// six decimals.
std::string format_tracks(const TrackSet& tracks);
void write_tracks(const TrackSet& tracks, const std::filesystem::path& path);

// Feature history sidecar in EMB1 layout, one row per line of the track
// file. Records that banked no feature get an all-zero row.
void write_track_embeddings(const TrackSet& tracks, const std::filesystem::path& path);

// Reads a track file; when `history` is given its rows are attached to the
// records line by line (zero rows mean "no feature").
TrackSet read_tracks(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& history = std::nullopt);

// MOT ground-truth lines `frame,id,x,y,w,h,conf,class,vis`; ids >= 1 and
// unique per frame.
GroundTruth parse_ground_truth(std::istream& in, const std::string& source);
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

struct RunConfig {
  TrackerConfig tracker;
  RefineConfig refine;
  MetricOptions metrics;
  ScenarioConfig scenario;
};

// JSON document with sections tracker / appearance / refine / metrics /
// scenario. Unknown keys and ill-typed values throw Error(Config); absent
// keys keep their defaults.
RunConfig parse_config(std::string_view text);
RunConfig read_config(const std::filesystem::path& path);

}  // namespace trackforge
