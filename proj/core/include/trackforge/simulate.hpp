#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "trackforge/metrics.hpp"
#include "trackforge/sequence.hpp"
#include "trackforge/tracklet.hpp"

namespace trackforge {

struct MotionModel {
  // Per-frame speed of the box centre, resampled on every direction change.
  double speed_min = 1.0;
  double speed_max = 6.0;
  double turn_probability = 0.05;
};

struct SizeModel {
  double width_min = 24.0;
  double width_max = 64.0;
  // Height / width.
  double aspect_min = 1.8;
  double aspect_max = 2.6;
  // Log-scale random walk step of the box size.
  double scale_drift = 0.01;
};

struct DetectorNoise {
  double p_miss = 0.05;
  // Mean number of clutter boxes per frame (Poisson).
  double clutter_rate = 0.5;
  double jitter_sigma = 1.0;
  // Confidence of a true detection is 1 - |N(0, conf_sigma)|.
  double conf_sigma = 0.15;
};

struct OcclusionModel {
  // Fraction of the smaller box covered by the larger one.
  double threshold = 0.5;
  double p_drop = 0.3;
};

struct ScenarioConfig {
  int num_ids = 22;
  int frames = 600;
  double field_width = 4096.0;
  double field_height = 1080.0;
  int embed_dim = 32;
  MotionModel motion;
  SizeModel size;
  DetectorNoise detector;
  // Expected norm of the noise added to an identity's feature before
  // renormalization (per-component sigma / sqrt(embed_dim)).
  double embedding_sigma = 0.1;
  OcclusionModel occlusion;
  // Identity pairs (a, b) where b reuses a's appearance centre.
  std::vector<std::pair<int, int>> confusable_pairs;
  std::uint64_t seed = 2025;
};

void validate(const ScenarioConfig& config);

// A generated sequence. Feature rows are float32 exactly as written to disk.
struct Scenario {
  GroundTruth ground_truth;
  // File order: per frame, identities ascending, then clutter.
  std::vector<Detection> detections;
  // Identity behind each detection; 0 for clutter.
  std::vector<int> detection_source;
  std::vector<std::vector<float>> features;
  int frame_count = 0;
  std::size_t embed_dim = 0;
};

// Deterministic in the config (seed included). Throws Error(Generation) for
// configs the field cannot accommodate and Error(Config) for invalid values.
Scenario gen_scenario(const ScenarioConfig& config);

// Same detections and normalized features as loading the written files.
SequenceBundle to_bundle(const Scenario& scenario);

// gt.txt, det.txt and emb.bin in `dir` (created if needed).
void write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

// The tracker output an ideal associator would produce: every identity's
// detections and features under its own id.
TrackSet oracle_tracks(const Scenario& scenario);

// Rounds to the 6-decimal grid used by the text formats.
double quantize(double v);

// Portable random source: std::mt19937_64 seeded with the SplitMix64
// finalizer of (seed xor stream). Distributions are implemented here so the
// output does not depend on the standard library in use.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  // [0, 1)
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  int poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

// normalize(centre + (sigma / sqrt(D)) * N(0, I)).
Embedding perturb(const Embedding& centre, double sigma, Rng& rng);
Embedding random_unit(std::size_t dim, Rng& rng);

struct CutSpec {
  int tracklet_id = 0;
  // First frame of the new fragment.
  int frame = 0;
};

struct CutLog {
  int original_id = 0;
  int fragment_id = 0;
  int frame = 0;
};

// Splits tracklets at the named frames into fresh-id fragments. Throws
// Error(InvalidParameter) when a cut does not leave records on both sides.
std::pair<TrackSet, std::vector<CutLog>> inject_cuts(const TrackSet& tracks,
                                                     const std::vector<CutSpec>& cuts);

struct SwapSpec {
  int id_a = 0;
  int id_b = 0;
  // From this frame on the two tracklets exchange their records.
  int frame = 0;
};

struct SwapLog {
  int id_a = 0;
  int id_b = 0;
  int frame = 0;
  // Identity switches the swap produces when scored against the unswapped set.
  int expected_switches = 0;
};

std::pair<TrackSet, std::vector<SwapLog>> inject_id_swaps(const TrackSet& tracks,
                                                          const std::vector<SwapSpec>& swaps);

}  // namespace trackforge
