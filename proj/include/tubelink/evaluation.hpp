#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

/// Acceptance thresholds on the four per-pair overlap quantities, plus the
/// sweep settings used by integrated scoring. The defaults are the 10%
/// quality level.
struct EvalThresholds {
  double spatial_recall = 0.1;      // t_sr
  double temporal_recall = 0.1;     // t_tr
  double spatial_precision = 0.1;   // t_sp
  double temporal_precision = 0.1;  // t_tp
  double eta = 0.1;
  double grid_step = 0.1;

  /// All values in [0,1], grid_step > 0 and dividing 1 evenly.
  void validate() const;
  static EvalThresholds uniform(double t) { return {t, t, t, t}; }
};

struct OverlapProfile {
  double spatial_recall = 0.0;
  double spatial_precision = 0.0;
  double temporal_recall = 0.0;
  double temporal_precision = 0.0;
};

/// Frame-fraction temporal terms and mean per-frame pixel-fraction spatial
/// terms over the shared frames. All zero when the tubes share no frame.
OverlapProfile overlap_profile(const ActionTube& det, const GroundTruthTube& gt);

/// sum_t |D_t ∩ G_t| / sum_t |D_t ∪ G_t| over the union of both frame spans.
double spatiotemporal_iou(const ActionTube& det, const GroundTruthTube& gt);

struct Assignment {
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
  OverlapProfile profile;
};

/// Greedy one-to-one matching within each video: detections in descending
/// score (ties: lower index), each to its highest-IoU unassigned ground truth
/// with IoU > 0 (ties: lower index). Class labels are not consulted.
std::vector<Assignment> match_tubes(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts);

/// Same class and every profile component at or above its threshold.
bool accept(const Assignment& pair, std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
            const EvalThresholds& th);
bool accept(const OverlapProfile& profile, bool same_class, const EvalThresholds& th);

/// 2rp/(r+p); 0 when both are 0.
double f1(double recall, double precision);

struct MatchReport {
  std::vector<Assignment> assignments;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  /// Recomputes the ratios from the counts (0 for empty denominators).
  void finalize();
  /// Sums counts and assignments (indices are left as-is) and recomputes.
  MatchReport& merge(const MatchReport& other);
};

MatchReport detection_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                              const EvalThresholds& th);
/// Reuses a precomputed matching.
MatchReport detection_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                              std::span<const Assignment> matching, const EvalThresholds& th);

/// Per video, multiset intersection of detected and annotated class labels.
MatchReport no_localisation_metrics(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts);

enum class SweepAxis { spatial_recall, spatial_precision, temporal_recall, temporal_precision };

constexpr std::array<SweepAxis, 4> kSweepAxes = {SweepAxis::spatial_recall, SweepAxis::spatial_precision,
                                                 SweepAxis::temporal_recall, SweepAxis::temporal_precision};

/// "sr", "sp", "tr", "tp".
std::string axis_name(SweepAxis axis);
std::optional<SweepAxis> parse_axis(std::string_view name);

/// Threshold grid {0, step, ..., 1}.
std::vector<double> threshold_grid(double grid_step);

struct CurvePoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Sweeps one threshold over the grid with the other three pinned at eta.
std::vector<CurvePoint> metric_curve(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                                     SweepAxis axis, double eta, double grid_step);

struct IntegratedScores {
  double spatial_recall = 0.0;      // I_sr
  double spatial_precision = 0.0;   // I_sp
  double temporal_recall = 0.0;     // I_tr
  double temporal_precision = 0.0;  // I_tp
  double overall = 0.0;
};

/// Mean of the four integrated values.
double integrated_performance(double i_sr, double i_sp, double i_tr, double i_tp);

/// Each I_x is the uniform mean of F1 along that axis's curve.
IntegratedScores integrated_scores(std::span<const ActionTube> dets, std::span<const GroundTruthTube> gts,
                                   double eta, double grid_step);

/// counts[g][d]: matched pairs whose ground truth has class g and detection
/// class d, localisation thresholds ignored.
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const ActionTube> dets,
                                                       std::span<const GroundTruthTube> gts,
                                                       std::size_t class_count);

struct ClassBreakdown {
  ClassId class_id = 0;
  std::size_t detections = 0;
  std::size_t ground_truths = 0;
  std::size_t true_positives = 0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

std::vector<ClassBreakdown> per_class_metrics(std::span<const ActionTube> dets,
                                              std::span<const GroundTruthTube> gts,
                                              const EvalThresholds& th, std::size_t class_count);

}  // namespace tubelink
