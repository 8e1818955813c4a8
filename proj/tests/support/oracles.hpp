#pragma once

#include <cstddef>
#include <vector>

#include "trackforge/geometry.hpp"
#include "trackforge/metrics.hpp"
#include "trackforge/tracklet.hpp"

namespace oracle {

// Overlap area measured by counting sample points of a regular grid with
// `cells_per_px` points per pixel along each axis. Rectangles are separable,
// so counting per axis and multiplying equals counting the 2-D grid.
double raster_intersection(const trackforge::BoundingBox& a, const trackforge::BoundingBox& b,
                           int cells_per_px);
double raster_area(const trackforge::BoundingBox& a, int cells_per_px);
double raster_iou(const trackforge::BoundingBox& a, const trackforge::BoundingBox& b,
                  int cells_per_px);
// The same after growing both boxes by `scale` on every side.
double raster_eiou(const trackforge::BoundingBox& a, const trackforge::BoundingBox& b,
                   double scale, int cells_per_px);

// Minimum total cost over all n! permutations of a square matrix.
long long min_permutation_cost(const std::vector<long long>& costs, std::size_t n);

// Labels from the full eps-neighbour graph: clusters are connected
// components of core points numbered by their lowest core index; a border
// point takes the smallest label among its core neighbours.
std::vector<int> dbscan_graph(const std::vector<std::vector<double>>& unit_points, double eps,
                              int min_samples);

struct OracleAlpha {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  double hota = 0.0;
};

struct OracleReport {
  std::vector<OracleAlpha> per_alpha;
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
  double loc_a = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
};

// Scores by enumerating every one-to-one matching of every frame. Intended
// for micro scenarios (a handful of boxes per frame).
OracleReport exhaustive_hota(const std::vector<trackforge::LabeledBox>& gt,
                             const std::vector<trackforge::LabeledBox>& pred,
                             const std::vector<double>& alphas, double clear_threshold);

}  // namespace oracle
