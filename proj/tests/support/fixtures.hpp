#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "trackforge/appearance.hpp"
#include "trackforge/geometry.hpp"
#include "trackforge/metrics.hpp"
#include "trackforge/simulate.hpp"
#include "trackforge/tracklet.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);
void spit(const std::filesystem::path& path, const std::string& text);

trackforge::BoundingBox random_box(std::mt19937_64& rng, double extent = 100.0,
                                   double min_size = 1.0, double max_size = 50.0);
trackforge::Embedding random_embedding(std::mt19937_64& rng, std::size_t dim);
trackforge::Embedding axis(std::size_t dim, std::size_t k, double sign = 1.0);
// centre + N(0, sigma^2) per component, renormalized.
trackforge::Embedding noisy(const trackforge::Embedding& centre, double sigma, std::mt19937_64& rng);

// One record per frame in [first, last] at a fixed box, each with a feature.
trackforge::Tracklet make_tracklet(int id, int first, int last, const trackforge::BoundingBox& box,
                                   const trackforge::Embedding& feature);

// A scenario with every noise source switched off.
trackforge::ScenarioConfig clean_config(std::uint64_t seed = 2025);
// The scenario the refinement tests and the acceptance suite share:
// heavy misses and occlusion with fast movers.
trackforge::ScenarioConfig occlusion_heavy_config();

std::vector<trackforge::LabeledBox> as_boxes(const trackforge::GroundTruth& gt);

}  // namespace fixtures
