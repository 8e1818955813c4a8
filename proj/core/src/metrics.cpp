#include "trackforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "trackforge/assignment.hpp"
#include "trackforge/error.hpp"

namespace trackforge {

namespace {

constexpr double kAlphaSlack = 1e-10;

struct FrameData {
  int frame = 0;
  std::vector<std::size_t> gt;    // dense gt id index
  std::vector<std::size_t> pred;  // dense pred id index
  std::vector<LabeledBox> gt_boxes;
  std::vector<LabeledBox> pred_boxes;
  std::vector<double> iou;  // gt.size() x pred.size()
};

// Both sides grouped by frame with ids mapped to dense indices; the
// co-occurrence pass result is cached alongside.
struct Prepared {
  std::vector<int> gt_ids;
  std::vector<int> pred_ids;
  std::vector<FrameData> frames;
  std::vector<double> gt_count;
  std::vector<double> pred_count;
  std::vector<double> alignment;  // gt_ids x pred_ids
  std::size_t total_gt = 0;
  std::size_t total_pred = 0;
};

std::vector<LabeledBox> sorted(std::vector<LabeledBox> v) {
  std::sort(v.begin(), v.end(), [](const LabeledBox& a, const LabeledBox& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  return v;
}

std::vector<int> unique_ids(const std::vector<LabeledBox>& v) {
  std::set<int> ids;
  for (const auto& b : v) ids.insert(b.id);
  return {ids.begin(), ids.end()};
}

std::size_t index_of(const std::vector<int>& ids, int id) {
  return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
}

Prepared prepare(const GroundTruth& gt_in, const TrackSet& pred_in) {
  validate(gt_in);
  Prepared p;
  const auto gt = sorted(gt_in.boxes);
  const auto pred = sorted(to_labeled(pred_in));
  p.gt_ids = unique_ids(gt);
  p.pred_ids = unique_ids(pred);
  p.total_gt = gt.size();
  p.total_pred = pred.size();
  const std::size_t G = p.gt_ids.size();
  const std::size_t P = p.pred_ids.size();
  p.gt_count.assign(G, 0.0);
  p.pred_count.assign(P, 0.0);

  std::map<int, FrameData> by_frame;
  for (const auto& b : gt) {
    auto& f = by_frame[b.frame];
    f.frame = b.frame;
    f.gt.push_back(index_of(p.gt_ids, b.id));
    f.gt_boxes.push_back(b);
  }
  for (const auto& b : pred) {
    auto& f = by_frame[b.frame];
    f.frame = b.frame;
    f.pred.push_back(index_of(p.pred_ids, b.id));
    f.pred_boxes.push_back(b);
  }

  std::vector<double> potential(G * P, 0.0);
  for (auto& [frame, f] : by_frame) {
    const std::size_t ng = f.gt.size();
    const std::size_t np = f.pred.size();
    f.iou.assign(ng * np, 0.0);
    std::vector<double> row_sum(ng, 0.0), col_sum(np, 0.0);
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        const double v = iou(f.gt_boxes[i].box, f.pred_boxes[j].box);
        f.iou[i * np + j] = v;
        row_sum[i] += v;
        col_sum[j] += v;
      }
    }
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        const double v = f.iou[i * np + j];
        if (v <= 0.0) continue;
        const double denom = row_sum[i] + col_sum[j] - v;
        potential[f.gt[i] * P + f.pred[j]] += v / denom;
      }
    }
    for (std::size_t g : f.gt) p.gt_count[g] += 1.0;
    for (std::size_t q : f.pred) p.pred_count[q] += 1.0;
    p.frames.push_back(std::move(f));
  }

  p.alignment.assign(G * P, 0.0);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t q = 0; q < P; ++q) {
      const double pot = potential[g * P + q];
      if (pot > 0.0) p.alignment[g * P + q] = pot / (p.gt_count[g] + p.pred_count[q] - pot);
    }
  }
  return p;
}

// Maximum-weight matching on non-negative scores via the min-cost solver:
// cost = max - score over a fully open matrix.
std::vector<std::pair<std::size_t, std::size_t>> max_score_matching(
    const std::vector<double>& score, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) return {};
  const double top = *std::max_element(score.begin(), score.end());
  CostMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m.set_cost(r, c, top - score[r * cols + c]);
  }
  return solve(m).pairs;
}

AlphaMatching match_prepared(const Prepared& p, double alpha) {
  AlphaMatching out;
  out.alpha = alpha;
  const std::size_t P = p.pred_ids.size();
  for (const auto& f : p.frames) {
    const std::size_t ng = f.gt.size();
    const std::size_t np = f.pred.size();
    std::vector<double> score(ng * np, 0.0);
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        const double v = f.iou[i * np + j];
        if (v >= alpha - kAlphaSlack) score[i * np + j] = p.alignment[f.gt[i] * P + f.pred[j]] * v;
      }
    }
    std::vector<char> gt_hit(ng, 0), pred_hit(np, 0);
    for (const auto& [i, j] : max_score_matching(score, ng, np)) {
      if (!(score[i * np + j] > 0.0)) continue;
      gt_hit[i] = 1;
      pred_hit[j] = 1;
      out.tp.push_back(MatchedPair{f.frame, f.gt_boxes[i].id, f.pred_boxes[j].id, f.iou[i * np + j]});
    }
    for (std::size_t i = 0; i < ng; ++i) {
      if (!gt_hit[i]) out.fn.push_back(f.gt_boxes[i]);
    }
    for (std::size_t j = 0; j < np; ++j) {
      if (!pred_hit[j]) out.fp.push_back(f.pred_boxes[j]);
    }
  }
  return out;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  }
}

}  // namespace

void validate(const GroundTruth& gt) {
  std::set<std::pair<int, int>> seen;
  for (const auto& b : gt.boxes) {
    if (b.id < 1) {
      throw Error(ErrorKind::Data, "ground-truth id must be >= 1 (frame " +
                                       std::to_string(b.frame) + ")");
    }
    if (!seen.emplace(b.frame, b.id).second) {
      throw Error(ErrorKind::Data, "duplicate ground-truth id " + std::to_string(b.id) +
                                       " in frame " + std::to_string(b.frame));
    }
    validate(b.box);
  }
}

std::vector<LabeledBox> to_labeled(const TrackSet& tracks) {
  std::vector<LabeledBox> out;
  out.reserve(tracks.record_count());
  for (const auto& t : tracks.tracklets) {
    for (const auto& r : t.records) out.push_back(LabeledBox{r.frame, t.id, r.box});
  }
  return out;
}

GroundTruth to_ground_truth(const TrackSet& tracks) { return GroundTruth{to_labeled(tracks)}; }

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
  return grid;
}

void validate(const MetricOptions& options) {
  if (options.alpha_grid.empty()) throw Error(ErrorKind::Config, "metrics.alpha_grid is empty");
  for (double a : options.alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) {
      throw Error(ErrorKind::Config, "metrics.alpha_grid values must lie in (0, 1)");
    }
  }
  if (!(options.clear_threshold > 0.0 && options.clear_threshold < 1.0)) {
    throw Error(ErrorKind::Config, "metrics.clear_threshold must lie in (0, 1)");
  }
}

AlphaMatching match_per_alpha(const GroundTruth& gt, const TrackSet& pred, double alpha) {
  check_alpha(alpha);
  return match_prepared(prepare(gt, pred), alpha);
}

double det_a(std::size_t tp, std::size_t fn, std::size_t fp) {
  const std::size_t denom = tp + fn + fp;
  if (denom == 0) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

double ass_a(const AlphaMatching& m) {
  if (m.tp.empty()) return 0.0;
  std::map<int, double> gt_len, pred_len;
  std::map<std::pair<int, int>, double> together;
  for (const auto& c : m.tp) {
    gt_len[c.gt_id] += 1.0;
    pred_len[c.pred_id] += 1.0;
    together[{c.gt_id, c.pred_id}] += 1.0;
  }
  for (const auto& b : m.fn) gt_len[b.id] += 1.0;
  for (const auto& b : m.fp) pred_len[b.id] += 1.0;
  double sum = 0.0;
  for (const auto& [key, tpa] : together) {
    const double fna = gt_len[key.first] - tpa;
    const double fpa = pred_len[key.second] - tpa;
    sum += tpa * (tpa / (tpa + fna + fpa));
  }
  return sum / static_cast<double>(m.tp.size());
}

double loc_a(const AlphaMatching& m) {
  if (m.tp.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : m.tp) s += c.iou;
  return s / static_cast<double>(m.tp.size());
}

MetricReport hota(const GroundTruth& gt, const TrackSet& pred, const MetricOptions& options) {
  validate(options);
  const Prepared p = prepare(gt, pred);
  MetricReport report;
  report.empty_scene = p.total_gt == 0 && p.total_pred == 0;

  for (double alpha : options.alpha_grid) {
    AlphaScores s;
    s.alpha = alpha;
    if (report.empty_scene) {
      s.det_a = s.ass_a = s.loc_a = s.hota = 1.0;
    } else {
      const AlphaMatching m = match_prepared(p, alpha);
      s.tp = m.tp.size();
      s.fn = m.fn.size();
      s.fp = m.fp.size();
      s.det_a = det_a(s.tp, s.fn, s.fp);
      s.ass_a = ass_a(m);
      s.loc_a = loc_a(m);
      s.hota = std::sqrt(s.det_a * s.ass_a);
    }
    report.per_alpha.push_back(s);
  }
  const double n = static_cast<double>(report.per_alpha.size());
  for (const auto& s : report.per_alpha) {
    report.hota += s.hota;
    report.det_a += s.det_a;
    report.ass_a += s.ass_a;
    report.loc_a += s.loc_a;
  }
  report.hota /= n;
  report.det_a /= n;
  report.ass_a /= n;
  report.loc_a /= n;

  if (!report.empty_scene) {
    const AlphaMatching at_half = match_prepared(p, options.clear_threshold);
    report.fp = static_cast<long>(at_half.fp.size());
    report.fn = static_cast<long>(at_half.fn.size());
  }
  report.idsw = idsw(gt, pred, options.clear_threshold);
  return report;
}

long idsw(const GroundTruth& gt, const TrackSet& pred, double threshold) {
  check_alpha(threshold);
  const Prepared p = prepare(gt, pred);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> last_match(p.gt_ids.size(), kNone);
  std::vector<std::size_t> prev_frame_match(p.gt_ids.size(), kNone);
  long switches = 0;
  for (const auto& f : p.frames) {
    const std::size_t ng = f.gt.size();
    const std::size_t np = f.pred.size();
    std::vector<double> score(ng * np, 0.0);
    for (std::size_t i = 0; i < ng; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        const double v = f.iou[i * np + j];
        if (v < threshold - kAlphaSlack) continue;
        // Continuing last frame's pairing outranks any IoU difference.
        score[i * np + j] = v + (prev_frame_match[f.gt[i]] == f.pred[j] ? 1000.0 : 0.0);
      }
    }
    std::vector<std::size_t> matched_now(p.gt_ids.size(), kNone);
    for (const auto& [i, j] : max_score_matching(score, ng, np)) {
      if (!(score[i * np + j] > 0.0)) continue;
      const std::size_t g = f.gt[i];
      const std::size_t q = f.pred[j];
      if (last_match[g] != kNone && last_match[g] != q) ++switches;
      last_match[g] = q;
      matched_now[g] = q;
    }
    prev_frame_match = std::move(matched_now);
  }
  return switches;
}

MeanReport mean_of(const std::vector<MetricReport>& reports) {
  MeanReport m;
  if (reports.empty()) return m;
  for (const auto& r : reports) {
    m.hota += r.hota;
    m.det_a += r.det_a;
    m.ass_a += r.ass_a;
    m.loc_a += r.loc_a;
    m.idsw += static_cast<double>(r.idsw);
    m.fp += static_cast<double>(r.fp);
    m.fn += static_cast<double>(r.fn);
  }
  const double n = static_cast<double>(reports.size());
  m.hota /= n;
  m.det_a /= n;
  m.ass_a /= n;
  m.loc_a /= n;
  m.idsw /= n;
  m.fp /= n;
  m.fn /= n;
  return m;
}

}  // namespace trackforge
