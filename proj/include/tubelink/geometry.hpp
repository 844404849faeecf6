#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tubelink {

/// Axis-aligned box on the integer pixel grid, half-open:
/// [x_min, x_max) x [y_min, y_max). Area is strictly positive.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 1;
  int y_max = 1;

  /// Throws ValidationError unless x_min < x_max and y_min < y_max.
  static BoundingBox make(int x_min, int y_min, int x_max, int y_max);

  int width() const { return x_max - x_min; }
  int height() const { return y_max - y_min; }
  std::int64_t area() const { return std::int64_t(width()) * height(); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  bool within(int frame_width, int frame_height) const {
    return x_min >= 0 && y_min >= 0 && x_max <= frame_width && y_max <= frame_height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Pixel count of a ∩ b (0 when disjoint).
std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b);

/// Intersection-over-union under half-open pixel-area semantics.
double box_iou(const BoundingBox& a, const BoundingBox& b);

/// One row-major run of occupied pixels: linear indices [start, start + length).
struct PixelRun {
  std::int64_t start = 0;
  std::int64_t length = 0;
  friend bool operator==(const PixelRun&, const PixelRun&) = default;
};

/// Non-empty set of pixels stored as sorted, maximal row-major runs.
class PixelMask {
 public:
  /// Strict: runs must be in range, sorted, non-overlapping, non-adjacent,
  /// and at least one run must exist. Throws ValidationError otherwise.
  static PixelMask from_runs(int width, int height, std::vector<PixelRun> runs);

  /// Flat [start, len, start, len, ...] encoding. Runs are sorted and merged
  /// before validation, so any covering of the pixel set is accepted.
  static PixelMask from_rle(int width, int height, std::span<const std::int64_t> flat);

  /// Row-major occupancy bitmap of width*height entries (non-zero = set).
  /// Returns nullopt for an all-zero bitmap.
  static std::optional<PixelMask> from_bitmap(int width, int height,
                                              std::span<const std::uint8_t> bits);

  /// Every pixel of `box`, which must lie inside the frame.
  static PixelMask from_box(int width, int height, const BoundingBox& box);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<PixelRun>& runs() const { return runs_; }
  std::vector<std::int64_t> to_rle() const;
  std::vector<std::uint8_t> to_bitmap() const;

  std::int64_t pixel_count() const;
  BoundingBox bounding_box() const;
  bool contains(int x, int y) const;

  /// |this ∩ other|. Throws ValidationError on dimension mismatch.
  std::int64_t intersection_count(const PixelMask& other) const;
  /// |this ∩ box| (box may extend past the frame).
  std::int64_t intersection_count(const BoundingBox& box) const;

  PixelMask united(const PixelMask& other) const;

  friend bool operator==(const PixelMask&, const PixelMask&) = default;

 private:
  PixelMask(int width, int height, std::vector<PixelRun> runs)
      : width_(width), height_(height), runs_(std::move(runs)) {}

  int width_ = 0;
  int height_ = 0;
  std::vector<PixelRun> runs_;
};

/// Throws ValidationError on dimension mismatch.
double mask_iou(const PixelMask& a, const PixelMask& b);

/// A spatial extent: a box, optionally refined by a pixel mask whose minimum
/// bounding box equals `box`.
struct Region {
  BoundingBox box;
  std::optional<PixelMask> mask;

  static Region from_box(const BoundingBox& box) { return Region{box, std::nullopt}; }
  static Region from_mask(PixelMask mask) {
    auto box = mask.bounding_box();
    return Region{box, std::move(mask)};
  }

  friend bool operator==(const Region&, const Region&) = default;
};

/// Pixel counts shared by IoU and the spatial evaluation terms. Masks are used
/// only when both sides carry one; otherwise both sides fall back to boxes.
struct OverlapCounts {
  std::int64_t intersection = 0;
  std::int64_t area_a = 0;
  std::int64_t area_b = 0;
  std::int64_t union_area() const { return area_a + area_b - intersection; }
};

OverlapCounts overlap_counts(const Region& a, const Region& b);

/// mask_iou when both regions carry masks, else box_iou.
double region_overlap(const Region& a, const Region& b);

}  // namespace tubelink
