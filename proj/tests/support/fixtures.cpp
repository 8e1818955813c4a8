#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("trackforge-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

trackforge::BoundingBox random_box(std::mt19937_64& rng, double extent, double min_size,
                                   double max_size) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> size(min_size, max_size);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

trackforge::Embedding random_embedding(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return trackforge::Embedding::normalize(v);
}

trackforge::Embedding axis(std::size_t dim, std::size_t k, double sign) {
  std::vector<double> v(dim, 0.0);
  v[k] = sign;
  return trackforge::Embedding::normalize(v);
}

trackforge::Embedding noisy(const trackforge::Embedding& centre, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  std::vector<double> v(centre.values().begin(), centre.values().end());
  for (auto& x : v) x += n(rng);
  return trackforge::Embedding::normalize(v);
}

trackforge::Tracklet make_tracklet(int id, int first, int last, const trackforge::BoundingBox& box,
                                   const trackforge::Embedding& feature) {
  trackforge::Tracklet t;
  t.id = id;
  for (int f = first; f <= last; ++f) {
    t.records.push_back({f, box, 0.9});
    t.embeddings.push_back({f, feature});
  }
  return t;
}

trackforge::ScenarioConfig clean_config(std::uint64_t seed) {
  trackforge::ScenarioConfig c;
  c.seed = seed;
  c.detector.p_miss = 0.0;
  c.detector.clutter_rate = 0.0;
  c.detector.jitter_sigma = 0.0;
  c.detector.conf_sigma = 0.0;
  c.occlusion.p_drop = 0.0;
  c.embedding_sigma = 0.0;
  return c;
}

trackforge::ScenarioConfig occlusion_heavy_config() {
  trackforge::ScenarioConfig c;
  c.seed = 7;
  c.detector.p_miss = 0.1;
  c.occlusion.p_drop = 0.5;
  c.embedding_sigma = 0.1;
  c.motion.speed_min = 10.0;
  c.motion.speed_max = 40.0;
  return c;
}

std::vector<trackforge::LabeledBox> as_boxes(const trackforge::GroundTruth& gt) { return gt.boxes; }

}  // namespace fixtures
