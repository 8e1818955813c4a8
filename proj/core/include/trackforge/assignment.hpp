#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace trackforge {

// Dense rows x cols cost table with a per-entry "forbidden" flag.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double cost(std::size_t r, std::size_t c) const { return costs_[r * cols_ + c]; }
  bool gated(std::size_t r, std::size_t c) const { return gated_[r * cols_ + c] != 0; }

  // Throws Error(InvalidParameter) for negative or non-finite costs.
  void set_cost(std::size_t r, std::size_t c, double value);
  void set_gated(std::size_t r, std::size_t c, bool value = true) {
    gated_[r * cols_ + c] = value ? 1 : 0;
  }

  std::size_t gated_count() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> costs_;
  std::vector<std::uint8_t> gated_;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

// lambda * spatial + (1 - lambda) * appearance / 2. Appearance costs are
// cosine distances on [0, 2]; halving maps them onto the spatial [0, 1]
// scale. Gates are OR-ed.
CostMatrix fuse(const CostMatrix& spatial, const CostMatrix& appearance, double lambda);

// Gates every entry whose cost exceeds `threshold` (boundary kept).
CostMatrix gate_above(const CostMatrix& m, double threshold);

// Gate on spatial costs of the form 1 - EIoU. threshold must be in (0, 1];
// 1.0 leaves every entry open.
CostMatrix gate_spatial(const CostMatrix& m, double proximity_threshold);

// Minimum-cost matching over non-gated entries that, among all matchings
// of maximum cardinality, has the least total cost. Rectangular input is
// solved with the shorter side as rows; ties resolve by scan order.
Assignment solve(const CostMatrix& m);

double total_cost(const CostMatrix& m, const Assignment& a);

}  // namespace trackforge
