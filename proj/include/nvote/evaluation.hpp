#pragma once

// KITTI-style BEV evaluation: greedy NMS, difficulty binning, interpolated
// average precision at 11 or 40 recall positions, TP/FP accounting and
// per-distance breakdowns.

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvote/error.hpp"
#include "nvote/geometry.hpp"
#include "nvote/kitti_io.hpp"
#include "nvote/text.hpp"

namespace nvote {

// Greedy NMS. Returns indices of the kept boxes in selection order
// (descending score, input order among equal scores).
inline std::vector<std::size_t> nms_indices(std::span<const OrientedBox> boxes, std::span<const double> scores,
                                            double iou_thr) {
  if (boxes.size() != scores.size()) throw ValidationError("boxes and scores differ in length");
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<bool> dead(boxes.size(), false);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t k = order[i];
    if (dead[k]) continue;
    keep.push_back(k);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t r = order[j];
      if (!dead[r] && rotated_iou(boxes[k], boxes[r]) > iou_thr) dead[r] = true;
    }
  }
  return keep;
}

inline std::vector<Detection> nms(std::span<const Detection> dets, double iou_thr) {
  std::vector<OrientedBox> boxes;
  std::vector<double> scores;
  for (const auto& d : dets) {
    boxes.push_back(bev_box(d));
    scores.push_back(d.score);
  }
  std::vector<Detection> kept;
  for (auto i : nms_indices(boxes, scores, iou_thr)) kept.push_back(dets[i]);
  return kept;
}

inline constexpr double kDefaultNmsIou = 0.25;

enum class Difficulty { easy = 0, moderate = 1, hard = 2, ignored = 3 };

inline std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::moderate: return "moderate";
    case Difficulty::hard: return "hard";
    case Difficulty::ignored: return "ignored";
  }
  return "ignored";
}

inline Difficulty parse_difficulty(std::string_view s) {
  if (s == "easy") return Difficulty::easy;
  if (s == "moderate") return Difficulty::moderate;
  if (s == "hard") return Difficulty::hard;
  throw ValidationError("unknown difficulty '" + std::string(s) + "'");
}

// Official KITTI object benchmark limits, easy / moderate / hard.
struct DifficultyThresholds {
  std::array<double, 3> min_height{40.0, 25.0, 25.0};
  std::array<int, 3> max_occlusion{0, 1, 2};
  std::array<double, 3> max_truncation{0.15, 0.30, 0.50};
};

inline Difficulty assign_difficulty(const GroundTruthObject& gt, const DifficultyThresholds& t = {}) {
  const double height = gt.bbox.height();
  for (int level = 0; level < 3; ++level) {
    if (height >= t.min_height[level] && gt.occlusion <= t.max_occlusion[level] &&
        gt.truncation <= t.max_truncation[level]) {
      return static_cast<Difficulty>(level);
    }
  }
  return Difficulty::ignored;
}

struct EvalConfig {
  double iou_threshold = 0.7;
  int recall_points = 11;
  Difficulty difficulty = Difficulty::moderate;
  std::string class_name = "Car";  // empty matches every class
  DifficultyThresholds thresholds;

  void validate() const {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw ValidationError("IoU threshold must be in (0, 1]");
    if (recall_points != 11 && recall_points != 40) throw ValidationError("recall points must be 11 or 40");
    if (difficulty == Difficulty::ignored) throw ValidationError("cannot evaluate the ignored difficulty");
  }
};

struct FrameData {
  std::vector<Detection> detections;
  std::vector<GroundTruthObject> labels;
};

enum class MatchResult { tp, fp, discarded };

enum class GtRole { valid, ignored, absent };

struct FrameMatch {
  std::vector<MatchResult> results;  // aligned with the frame's detections
  std::vector<bool> gt_matched;      // aligned with the frame's labels
};

// Greedy matching in descending score order. A detection is TP when its best
// IoU against a still-unmatched valid label reaches the threshold. Otherwise
// it is discarded if it overlaps an ignored label at the threshold, sits in a
// DontCare region, or fails `in_scope`; else it is FP. Detections rejected by
// `eligible` (e.g. other classes) are discarded without matching.
inline FrameMatch match_frame(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                              std::span<const GtRole> roles, double iou_thr,
                              const std::function<bool(const Detection&)>& eligible,
                              const std::function<bool(const Detection&)>& in_scope = {}) {
  FrameMatch m{std::vector<MatchResult>(dets.size(), MatchResult::discarded), std::vector<bool>(gts.size(), false)};
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<OrientedBox> gt_boxes;
  gt_boxes.reserve(gts.size());
  for (const auto& g : gts) gt_boxes.push_back(bev_box(g));

  for (auto di : order) {
    const Detection& d = dets[di];
    if (!eligible(d)) continue;
    const OrientedBox box = bev_box(d);
    int best = -1;
    double best_iou = -1.0;
    bool hits_ignored = false;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (roles[gi] == GtRole::absent) continue;
      const double iou = rotated_iou(box, gt_boxes[gi]);
      if (roles[gi] == GtRole::ignored) {
        hits_ignored = hits_ignored || iou >= iou_thr;
      } else if (!m.gt_matched[gi] && iou >= iou_thr && iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(gi);
      }
    }
    if (best >= 0) {
      m.gt_matched[best] = true;
      m.results[di] = MatchResult::tp;
      continue;
    }
    if (hits_ignored) continue;
    const double cu = 0.5 * (d.bbox.left + d.bbox.right);
    const double cv = 0.5 * (d.bbox.top + d.bbox.bottom);
    const bool in_dont_care = std::any_of(gts.begin(), gts.end(), [&](const GroundTruthObject& g) {
      return g.is_dont_care() && cu >= g.bbox.left && cu <= g.bbox.right && cv >= g.bbox.top && cv <= g.bbox.bottom;
    });
    if (in_dont_care) continue;
    if (in_scope && !in_scope(d)) continue;
    m.results[di] = MatchResult::fp;
  }
  return m;
}

inline bool class_matches(std::string_view wanted, std::string_view type) {
  return wanted.empty() || wanted == type;
}

// Interpolated AP: p(r) = max precision at recall >= r, averaged over
// {0, 0.1, ..., 1} for 11 points or {1/40, ..., 1} for 40 points.
struct ScoredOutcome {
  double score = 0.0;
  bool tp = false;
};

inline double interpolated_ap(std::vector<ScoredOutcome> outcomes, std::size_t n_gt, int recall_points) {
  if (n_gt == 0) throw DomainError("AP is undefined without ground truth");
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) { return a.score > b.score; });
  std::vector<double> recall, precision;
  std::size_t tp = 0, fp = 0;
  for (const auto& o : outcomes) {
    (o.tp ? tp : fp)++;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
  }
  // Running maximum from the right turns precision into its envelope.
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  const bool eleven = recall_points == 11;
  for (int k = eleven ? 0 : 1; k <= (eleven ? 10 : 40); ++k) {
    const double r = eleven ? k / 10.0 : k / 40.0;
    const auto it = std::find_if(recall.begin(), recall.end(), [r](double v) { return v >= r; });
    if (it != recall.end()) sum += precision[static_cast<std::size_t>(it - recall.begin())];
  }
  return sum / recall_points;
}

struct EvalReport {
  std::optional<double> ap;
  int n_tp = 0;
  int n_fp = 0;
  int n_gt = 0;
};

struct BucketReport {
  double z_lo = 0.0;
  double z_hi = 0.0;
  EvalReport report;
};

namespace detail {

inline EvalReport evaluate_frames(std::span<const FrameData> frames, const EvalConfig& cfg,
                                  const std::function<bool(const GroundTruthObject&)>& gt_in_scope,
                                  const std::function<bool(const Detection&)>& det_in_scope) {
  cfg.validate();
  EvalReport rep;
  std::vector<ScoredOutcome> outcomes;
  for (const auto& f : frames) {
    std::vector<GtRole> roles;
    roles.reserve(f.labels.size());
    for (const auto& g : f.labels) {
      if (g.is_dont_care() || !class_matches(cfg.class_name, g.type)) {
        roles.push_back(GtRole::absent);
      } else if (assign_difficulty(g, cfg.thresholds) <= cfg.difficulty && gt_in_scope(g)) {
        roles.push_back(GtRole::valid);
        ++rep.n_gt;
      } else {
        roles.push_back(GtRole::ignored);
      }
    }
    const auto m = match_frame(
        f.detections, f.labels, roles, cfg.iou_threshold,
        [&](const Detection& d) { return class_matches(cfg.class_name, d.type); }, det_in_scope);
    for (std::size_t i = 0; i < f.detections.size(); ++i) {
      if (m.results[i] == MatchResult::discarded) continue;
      const bool tp = m.results[i] == MatchResult::tp;
      (tp ? rep.n_tp : rep.n_fp)++;
      outcomes.push_back({f.detections[i].score, tp});
    }
  }
  if (rep.n_gt > 0) rep.ap = interpolated_ap(std::move(outcomes), static_cast<std::size_t>(rep.n_gt), cfg.recall_points);
  return rep;
}

}  // namespace detail

inline EvalReport average_precision(std::span<const FrameData> frames, const EvalConfig& cfg) {
  return detail::evaluate_frames(
      frames, cfg, [](const GroundTruthObject&) { return true; }, {});
}

inline EvalReport average_precision(const std::vector<Detection>& dets, const std::vector<GroundTruthObject>& gts,
                                    const EvalConfig& cfg) {
  const FrameData frame{dets, gts};
  return average_precision(std::span<const FrameData>(&frame, 1), cfg);
}

struct TpFpCounts {
  int n_tp = 0;
  int n_fp = 0;

  friend bool operator==(const TpFpCounts&, const TpFpCounts&) = default;
};

// Every non-DontCare label of the requested class (any class when empty) is
// a valid target regardless of difficulty.
inline TpFpCounts tp_fp_counts(std::span<const Detection> dets, std::span<const GroundTruthObject> gts,
                               double iou_star, std::string_view class_name = {}) {
  std::vector<GtRole> roles;
  for (const auto& g : gts) {
    roles.push_back(!g.is_dont_care() && class_matches(class_name, g.type) ? GtRole::valid : GtRole::absent);
  }
  const auto m = match_frame(dets, gts, roles, iou_star,
                             [&](const Detection& d) { return class_matches(class_name, d.type); });
  TpFpCounts c;
  for (auto r : m.results) {
    if (r == MatchResult::tp) ++c.n_tp;
    if (r == MatchResult::fp) ++c.n_fp;
  }
  return c;
}

// AP per z range [lo, hi). Labels outside the bucket become ignored; unmatched
// detections outside the bucket are discarded rather than counted as FP.
inline std::vector<BucketReport> distance_bucket_eval(std::span<const FrameData> frames,
                                                      std::span<const std::pair<double, double>> buckets,
                                                      const EvalConfig& cfg) {
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    if (!(buckets[i].first < buckets[i].second)) throw ValidationError("bucket must satisfy lo < hi");
    if (i > 0 && buckets[i].first < buckets[i - 1].second) throw ValidationError("buckets must be disjoint and ordered");
  }
  std::vector<BucketReport> out;
  for (const auto& [lo, hi] : buckets) {
    auto in = [lo = lo, hi = hi](double z) { return z >= lo && z < hi; };
    out.push_back({lo, hi,
                   detail::evaluate_frames(
                       frames, cfg, [&](const GroundTruthObject& g) { return in(g.z); },
                       [&](const Detection& d) { return in(d.z); })});
  }
  return out;
}

inline std::string bucket_key(const BucketReport& b) {
  return "bucket_" + text::format_real(b.z_lo) + "_" + text::format_real(b.z_hi) + "_ap";
}

// Human-readable lines followed by a key=value block.
inline std::string format_eval_report(const EvalReport& rep, const EvalConfig& cfg,
                                      std::span<const BucketReport> buckets = {}) {
  auto ap_text = [](const std::optional<double>& ap) { return ap ? text::format_fixed(*ap, 6) : std::string("none"); };
  const std::string diff(to_string(cfg.difficulty));
  std::string s;
  s += "BEV AP (" + diff + ", IoU " + text::format_real(cfg.iou_threshold) + ", R" +
       std::to_string(cfg.recall_points) + "): " + ap_text(rep.ap) + "\n";
  s += "ground truth: " + std::to_string(rep.n_gt) + "  TP: " + std::to_string(rep.n_tp) +
       "  FP: " + std::to_string(rep.n_fp) + "\n";
  for (const auto& b : buckets) {
    s += "  z in [" + text::format_real(b.z_lo) + ", " + text::format_real(b.z_hi) + "): AP " + ap_text(b.report.ap) +
         " (gt " + std::to_string(b.report.n_gt) + ")\n";
  }
  s += "ap_" + diff + "=" + ap_text(rep.ap) + "\n";
  s += "n_gt=" + std::to_string(rep.n_gt) + "\n";
  s += "n_tp=" + std::to_string(rep.n_tp) + "\n";
  s += "n_fp=" + std::to_string(rep.n_fp) + "\n";
  for (const auto& b : buckets) s += bucket_key(b) + "=" + ap_text(b.report.ap) + "\n";
  return s;
}

}  // namespace nvote
