#include "trackforge/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "trackforge/error.hpp"

namespace trackforge {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), costs_(rows * cols, fill), gated_(rows * cols, 0) {
  if (!std::isfinite(fill) || fill < 0.0) {
    throw Error(ErrorKind::InvalidParameter, "cost fill must be finite and non-negative");
  }
}

void CostMatrix::set_cost(std::size_t r, std::size_t c, double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::InvalidParameter,
                "cost entries must be finite and non-negative, got " + std::to_string(value));
  }
  costs_[r * cols_ + c] = value;
}

std::size_t CostMatrix::gated_count() const {
  return static_cast<std::size_t>(std::count(gated_.begin(), gated_.end(), std::uint8_t{1}));
}

CostMatrix fuse(const CostMatrix& spatial, const CostMatrix& appearance, double lambda) {
  if (spatial.rows() != appearance.rows() || spatial.cols() != appearance.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "fuse requires matrices of identical shape");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "fusion weight must lie in [0, 1]");
  }
  CostMatrix out(spatial.rows(), spatial.cols());
  for (std::size_t r = 0; r < spatial.rows(); ++r) {
    for (std::size_t c = 0; c < spatial.cols(); ++c) {
      double v;
      if (lambda == 1.0) {
        v = spatial.cost(r, c);
      } else if (lambda == 0.0) {
        v = 0.5 * appearance.cost(r, c);
      } else {
        v = lambda * spatial.cost(r, c) + (1.0 - lambda) * 0.5 * appearance.cost(r, c);
      }
      out.set_cost(r, c, v);
      out.set_gated(r, c, spatial.gated(r, c) || appearance.gated(r, c));
    }
  }
  return out;
}

CostMatrix gate_above(const CostMatrix& m, double threshold) {
  CostMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.cost(r, c) > threshold) out.set_gated(r, c);
    }
  }
  return out;
}

CostMatrix gate_spatial(const CostMatrix& m, double proximity_threshold) {
  if (!(proximity_threshold > 0.0 && proximity_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "proximity threshold must lie in (0, 1]");
  }
  return gate_above(m, proximity_threshold);
}

namespace {

// Shortest augmenting path Hungarian method with row/column potentials on a
// dense n x m matrix with n <= m (1-based internally). Every row is assigned.
std::vector<std::size_t> hungarian_rect(const std::vector<double>& a, std::size_t n,
                                        std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment solve(const CostMatrix& m) {
  Assignment out;
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  // Gated entries get a sentinel that exceeds the sum of any min(rows, cols)
  // real costs, so the optimum first maximizes the number of real pairs and
  // then minimizes their cost. The shorter side is solved as rows.
  double max_cost = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!m.gated(r, c)) max_cost = std::max(max_cost, m.cost(r, c));
    }
  }
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t w = transposed ? rows : cols;
  const double sentinel = (max_cost + 1.0) * static_cast<double>(n + 1);

  std::vector<double> dense(n * w, sentinel);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (m.gated(r, c)) continue;
      if (transposed) {
        dense[c * w + r] = m.cost(r, c);
      } else {
        dense[r * w + c] = m.cost(r, c);
      }
    }
  }
  const auto assigned = hungarian_rect(dense, n, w);

  std::vector<std::size_t> row_to_col(rows, cols);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = transposed ? assigned[i] : i;
    const std::size_t c = transposed ? i : assigned[i];
    if (!m.gated(r, c)) row_to_col[r] = c;
  }
  std::vector<char> col_used(cols, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t c = row_to_col[r];
    if (c < cols) {
      out.pairs.emplace_back(r, c);
      col_used[c] = 1;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

double total_cost(const CostMatrix& m, const Assignment& a) {
  double s = 0.0;
  for (const auto& [r, c] : a.pairs) s += m.cost(r, c);
  return s;
}

}  // namespace trackforge
