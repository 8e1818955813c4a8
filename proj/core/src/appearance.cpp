#include "trackforge/appearance.hpp"

#include <cmath>
#include <string>

#include "trackforge/error.hpp"

namespace trackforge {

namespace {

template <typename T>
Embedding normalize_impl(std::span<const T> raw, Embedding (*make)(std::vector<double>)) {
  if (raw.empty()) throw Error(ErrorKind::InvalidEmbedding, "embedding has no components");
  double sq = 0.0;
  for (T v : raw) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw Error(ErrorKind::InvalidEmbedding, "embedding has a non-finite component");
    }
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  if (sq == 0.0) throw Error(ErrorKind::InvalidEmbedding, "cannot normalize a zero vector");
  const double norm = std::sqrt(sq);
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / norm;
  return make(std::move(out));
}

void check_dims(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding dimensions differ (" +
                                                  std::to_string(a.dim()) + " vs " +
                                                  std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Embedding Embedding::normalize(std::span<const double> raw) {
  return normalize_impl<double>(raw, [](std::vector<double> v) { return Embedding(std::move(v)); });
}

Embedding Embedding::normalize(std::span<const float> raw) {
  return normalize_impl<float>(raw, [](std::vector<double> v) { return Embedding(std::move(v)); });
}

double dot(const Embedding& a, const Embedding& b) {
  check_dims(a, b);
  const auto va = a.values();
  const auto vb = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
  return s;
}

double cosine_distance(const Embedding& a, const Embedding& b) { return 1.0 - dot(a, b); }

FeatureBank make_bank(int frame, const Embedding& first) {
  return FeatureBank{first, {FramedEmbedding{frame, first}}};
}

FeatureBank bank_update(FeatureBank bank, int frame, const Embedding& f, double momentum,
                        std::size_t max_history) {
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "bank momentum must lie in [0, 1]");
  }
  if (!bank.history.empty() && frame <= bank.history.back().frame) {
    throw Error(ErrorKind::Sequencing, "feature bank frames must be strictly increasing");
  }
  if (bank.current.empty()) {
    bank.current = f;
  } else if (momentum == 0.0) {
    check_dims(bank.current, f);
    bank.current = f;
  } else if (momentum < 1.0) {
    check_dims(bank.current, f);
    const auto cur = bank.current.values();
    const auto nxt = f.values();
    std::vector<double> mixed(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      mixed[i] = momentum * cur[i] + (1.0 - momentum) * nxt[i];
    }
    // Antipodal inputs at momentum 0.5 cancel; keep the new observation then.
    try {
      bank.current = Embedding::normalize(std::span<const double>(mixed));
    } catch (const Error&) {
      bank.current = f;
    }
  }
  bank.history.push_back(FramedEmbedding{frame, f});
  if (max_history > 0 && bank.history.size() > max_history) {
    bank.history.erase(bank.history.begin(),
                       bank.history.begin() +
                           static_cast<std::ptrdiff_t>(bank.history.size() - max_history));
  }
  return bank;
}

double tracklet_distance(std::span<const FramedEmbedding> a, std::span<const FramedEmbedding> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::InvalidParameter, "tracklet distance needs non-empty histories");
  }
  double sum = 0.0;
  for (const auto& fa : a) {
    for (const auto& fb : b) sum += cosine_distance(fa.embedding, fb.embedding);
  }
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace trackforge
