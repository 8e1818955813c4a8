#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace trackforge {

// Unit-norm appearance feature. The only way to build one is through
// normalization, so every instance satisfies |v| = 1.
class Embedding {
 public:
  Embedding() = default;

  // Throws Error(InvalidEmbedding) for empty, zero or non-finite input.
  static Embedding normalize(std::span<const double> raw);
  static Embedding normalize(std::span<const float> raw);

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

double dot(const Embedding& a, const Embedding& b);

// 1 - a.b, in [0, 2]. Throws Error(DimensionMismatch) on differing dims.
double cosine_distance(const Embedding& a, const Embedding& b);

struct FramedEmbedding {
  int frame = 0;
  Embedding embedding;
};

// A track's appearance state: a smoothed representative plus a bounded
// history of the raw features that fed it.
struct FeatureBank {
  Embedding current;
  std::vector<FramedEmbedding> history;
};

FeatureBank make_bank(int frame, const Embedding& first);

// current <- normalize(momentum * current + (1 - momentum) * f), then f is
// appended to history; history keeps the `max_history` most recent entries
// (0 = unbounded). Frames must be strictly increasing.
FeatureBank bank_update(FeatureBank bank, int frame, const Embedding& f, double momentum,
                        std::size_t max_history = 30);

// Mean pairwise cosine distance over all L_i * L_j embedding pairs.
// Throws Error(InvalidParameter) if either side is empty.
double tracklet_distance(std::span<const FramedEmbedding> a,
                         std::span<const FramedEmbedding> b);

}  // namespace trackforge
