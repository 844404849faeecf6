#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tubelink/geometry.hpp"
#include "tubelink/types.hpp"

namespace tubelink {

/// Per-pixel normalised optical-flow magnitude of one frame, row-major.
struct FlowMagnitudeMap {
  int width = 0;
  int height = 0;
  int frame = 1;
  std::vector<double> magnitudes;

  double at(int x, int y) const { return magnitudes[std::size_t(y) * width + x]; }
  double total() const;
  /// Throws ValidationError on size mismatch or negative/non-finite values.
  void validate() const;
};

/// Binary foreground of one frame (e.g. a motion segmenter's output).
struct BinarySegmentation {
  int width = 0;
  int height = 0;
  int frame = 1;
  std::optional<PixelMask> foreground;  // nullopt when no pixel is set
};

/// Fraction of the frame's total flow magnitude inside the region; mask pixels
/// when the region carries a mask, box pixels otherwise. Zero when the frame
/// has no flow at all. Throws ValidationError on dimension mismatch.
double actionness(const Region& region, const FlowMagnitudeMap& flow);

/// Keeps proposals with actionness >= threshold, in input order, each
/// annotated with its ratio.
std::vector<RegionProposal> prune_by_actionness(std::span<const RegionProposal> proposals,
                                                const FlowMagnitudeMap& flow, double threshold);

/// Greedy per-class non-maximum suppression. Candidates are visited by
/// descending scores[class_id] (ties: lower input index first); a candidate
/// survives when its region_overlap with every survivor is < iou_threshold.
/// Returns surviving input indices in ascending order.
std::vector<std::size_t> nms_indices(std::span<const RegionProposal> proposals, ClassId class_id,
                                     double iou_threshold);

std::vector<RegionProposal> nms(std::span<const RegionProposal> proposals, ClassId class_id,
                                double iou_threshold);

/// Maximal 8-connected foreground components, ordered by their first pixel in
/// row-major order.
std::vector<PixelMask> connected_components(const BinarySegmentation& seg);

constexpr std::size_t kDefaultPowersetCap = 12;

/// One mask proposal per non-empty subset of components (2^N - 1 of them).
/// When N > cap only the cap largest components (by pixel count, ties to the
/// earlier component) take part. Scores are zero-filled to class_count.
std::vector<RegionProposal> powerset_proposals(std::span<const PixelMask> components,
                                               int frame_index, std::size_t class_count,
                                               std::size_t cap = kDefaultPowersetCap);

}  // namespace tubelink
