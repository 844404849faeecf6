#include "tubelink/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tubelink/errors.hpp"

namespace tubelink {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

std::size_t grid_intervals(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw ValidationError("grid_step must lie in (0,1]");
  const double n = 1.0 / grid_step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw ValidationError("grid_step must divide 1 evenly");
  }
  return std::size_t(rounded);
}

}  // namespace

void EvalThresholds::validate() const {
  if (!unit(spatial_recall) || !unit(temporal_recall) || !unit(spatial_precision) || !unit(temporal_precision)) {
    throw ValidationError("thresholds must lie in [0,1]");
  }
  if (!unit(eta)) throw ValidationError("eta must lie in [0,1]");
  grid_intervals(grid_step);
}

OverlapProfile overlap_profile(const ActionTube& det, const GroundTruthTube& gt) {
  OverlapProfile p;
  if (det.video_id != gt.video_id) return p;
  const int lo = std::max(det.t_start, gt.t_start);
  const int hi = std::min(det.t_end, gt.t_end);
  if (lo > hi) return p;
  const int shared = hi - lo + 1;
  double sr = 0.0, sp = 0.0;
  for (int t = lo; t <= hi; ++t) {
    const auto c = overlap_counts(det.region_at(t), gt.region_at(t));
    sr += double(c.intersection) / double(c.area_b);
    sp += double(c.intersection) / double(c.area_a);
  }
  p.spatial_recall = sr / shared;
  p.spatial_precision = sp / shared;
  p.temporal_recall = double(shared) / gt.length();
  p.temporal_precision = double(shared) / det.length();
  return p;
}

double spatiotemporal_iou(const ActionTube& det, const GroundTruthTube& gt) {
  if (det.video_id != gt.video_id) return 0.0;
  const int lo = std::min(det.t_start, gt.t_start);
  const int hi = std::max(det.t_end, gt.t_end);
  std::int64_t inter = 0, uni = 0;
  for (int t = lo; t <= hi; ++t) {
    const bool in_det = t >= det.t_start && t <= det.t_end;
    const bool in_gt = t >= gt.t_start && t <= gt.t_end;
    if (in_det && in_gt) {
      const auto c = overlap_counts(det.region_at(t), gt.region_at(t));
      inter += c.intersection;
      uni += c.union_area();
    } else if (in_det) {
      uni += overlap_counts(det.region_at(t), det.region_at(t)).area_a;
    } else if (in_gt) {
      uni += overlap_counts(gt.region_at(t), gt.region_at(t)).area_a;
    }
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<Assignment> match_tubes(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::map<std::string, std::vector<std::size_t>, std::less<>> gts_by_video;
  for (std::size_t g = 0; g < gts.size(); ++g) gts_by_video[gts[g].video_id].push_back(g);

  std::vector<bool> taken(gts.size(), false);
  std::vector<Assignment> out;
  for (std::size_t d : order) {
    auto it = gts_by_video.find(dets[d].video_id);
    if (it == gts_by_video.end()) continue;
    double best = 0.0;
    std::optional<std::size_t> arg;
    for (std::size_t g : it->second) {
      if (taken[g]) continue;
      const double iou = spatiotemporal_iou(dets[d], gts[g]);
      if (iou > best) {
        best = iou;
        arg = g;
      }
    }
    if (!arg) continue;
    taken[*arg] = true;
    out.push_back({d, *arg, best, overlap_profile(dets[d], gts[*arg])});
  }
  return out;
}

bool accept(const OverlapProfile& p, bool same_class, const EvalThresholds& th) {
  return same_class && p.spatial_recall >= th.spatial_recall && p.temporal_recall >= th.temporal_recall &&
         p.spatial_precision >= th.spatial_precision && p.temporal_precision >= th.temporal_precision;
}

bool accept(const Assignment& pair, std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
            const EvalThresholds& th) {
  return accept(pair.profile, dets[pair.detection].class_id == gts[pair.ground_truth].class_id, th);
}

double f1(double recall, double precision) {
  const double s = recall + precision;
  return s == 0.0 ? 0.0 : 2.0 * recall * precision / s;
}

void MatchReport::finalize() {
  const double tp = double(true_positives);
  recall = (true_positives + false_negatives) == 0 ? 0.0 : tp / double(true_positives + false_negatives);
  precision = (true_positives + false_positives) == 0 ? 0.0 : tp / double(true_positives + false_positives);
  f1 = tubelink::f1(recall, precision);
}

MatchReport& MatchReport::merge(const MatchReport& other) {
  assignments.insert(assignments.end(), other.assignments.begin(), other.assignments.end());
  true_positives += other.true_positives;
  false_positives += other.false_positives;
  false_negatives += other.false_negatives;
  finalize();
  return *this;
}

MatchReport detection_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                              const EvalThresholds& th) {
  const auto matching = match_tubes(dets, gts);
  return detection_metrics(dets, gts, matching, th);
}

MatchReport detection_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                              std::span<const Assignment> matching, const EvalThresholds& th) {
  MatchReport r;
  r.assignments.assign(matching.begin(), matching.end());
  for (const auto& a : matching) r.true_positives += accept(a, dets, gts, th) ? 1 : 0;
  r.false_positives = dets.size() - r.true_positives;
  r.false_negatives = gts.size() - r.true_positives;
  r.finalize();
  return r;
}

MatchReport no_localisation_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts) {
  std::map<std::pair<std::string, ClassId>, std::size_t> det_counts, gt_counts;
  for (const auto& d : dets) ++det_counts[{d.video_id, d.class_id}];
  for (const auto& g : gts) ++gt_counts[{g.video_id, g.class_id}];
  MatchReport r;
  for (const auto& [key, n] : det_counts) {
    auto it = gt_counts.find(key);
    if (it != gt_counts.end()) r.true_positives += std::min(n, it->second);
  }
  r.false_positives = dets.size() - r.true_positives;
  r.false_negatives = gts.size() - r.true_positives;
  r.finalize();
  return r;
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::spatial_recall: return "sr";
    case SweepAxis::spatial_precision: return "sp";
    case SweepAxis::temporal_recall: return "tr";
    case SweepAxis::temporal_precision: return "tp";
  }
  return "?";
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
  for (auto axis : kSweepAxes) {
    if (axis_name(axis) == name) return axis;
  }
  return std::nullopt;
}

std::vector<double> threshold_grid(double grid_step) {
  const std::size_t n = grid_intervals(grid_step);
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) grid[i] = double(i) / double(n);
  return grid;
}

namespace {

EvalThresholds pinned(SweepAxis axis, double value, double eta) {
  EvalThresholds th = EvalThresholds::uniform(eta);
  switch (axis) {
    case SweepAxis::spatial_recall: th.spatial_recall = value; break;
    case SweepAxis::spatial_precision: th.spatial_precision = value; break;
    case SweepAxis::temporal_recall: th.temporal_recall = value; break;
    case SweepAxis::temporal_precision: th.temporal_precision = value; break;
  }
  return th;
}

std::vector<CurvePoint> curve_from(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                                   std::span<const Assignment> matching, SweepAxis axis, double eta,
                                   double grid_step) {
  std::vector<CurvePoint> rows;
  for (double t : threshold_grid(grid_step)) {
    const auto r = detection_metrics(dets, gts, matching, pinned(axis, t, eta));
    rows.push_back({t, r.recall, r.precision, r.f1});
  }
  return rows;
}

}  // namespace

std::vector<CurvePoint> metric_curve(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                                     SweepAxis axis, double eta, double grid_step) {
  const auto matching = match_tubes(dets, gts);
  return curve_from(dets, gts, matching, axis, eta, grid_step);
}

double integrated_performance(double i_sr, double i_sp, double i_tr, double i_tp) {
  return (i_sr + i_sp + i_tr + i_tp) / 4.0;
}

IntegratedScores integrated_scores(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                                   double eta, double grid_step) {
  const auto matching = match_tubes(dets, gts);
  auto mean_f1 = [&](SweepAxis axis) {
    const auto rows = curve_from(dets, gts, matching, axis, eta, grid_step);
    double s = 0.0;
    for (const auto& r : rows) s += r.f1;
    return s / double(rows.size());
  };
  IntegratedScores out;
  out.spatial_recall = mean_f1(SweepAxis::spatial_recall);
  out.spatial_precision = mean_f1(SweepAxis::spatial_precision);
  out.temporal_recall = mean_f1(SweepAxis::temporal_recall);
  out.temporal_precision = mean_f1(SweepAxis::temporal_precision);
  out.overall = integrated_performance(out.spatial_recall, out.spatial_precision, out.temporal_recall,
                                       out.temporal_precision);
  return out;
}

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const ActionTube> dets,
                                                       std::span<const GroundTruthTube> gts,
                                                       std::size_t class_count) {
  std::vector<std::vector<std::size_t>> m(class_count, std::vector<std::size_t>(class_count, 0));
  for (const auto& a : match_tubes(dets, gts)) {
    ++m.at(gts[a.ground_truth].class_id).at(dets[a.detection].class_id);
  }
  return m;
}

std::vector<ClassBreakdown> per_class_metrics(std::span<const ActionTube> dets,
                                              std::span<const GroundTruthTube> gts,
                                              const EvalThresholds& th, std::size_t class_count) {
  std::vector<ClassBreakdown> out(class_count);
  for (ClassId c = 0; c < class_count; ++c) out[c].class_id = c;
  for (const auto& d : dets) ++out.at(d.class_id).detections;
  for (const auto& g : gts) ++out.at(g.class_id).ground_truths;
  for (const auto& a : match_tubes(dets, gts)) {
    if (accept(a, dets, gts, th)) ++out[dets[a.detection].class_id].true_positives;
  }
  for (auto& b : out) {
    b.recall = b.ground_truths == 0 ? 0.0 : double(b.true_positives) / double(b.ground_truths);
    b.precision = b.detections == 0 ? 0.0 : double(b.true_positives) / double(b.detections);
    b.f1 = f1(b.recall, b.precision);
  }
  return out;
}

}  // namespace tubelink
