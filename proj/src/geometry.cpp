#include "tubelink/geometry.hpp"

#include <algorithm>
#include <string>

#include "tubelink/errors.hpp"

namespace tubelink {

BoundingBox BoundingBox::make(int x_min, int y_min, int x_max, int y_max) {
  BoundingBox b{x_min, y_min, x_max, y_max};
  if (!b.valid()) {
    throw ValidationError("degenerate box [" + std::to_string(x_min) + "," + std::to_string(y_min) +
                          "," + std::to_string(x_max) + "," + std::to_string(y_max) + "]");
  }
  return b;
}

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const std::int64_t h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0;
  return w * h;
}

double box_iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  return double(inter) / double(a.area() + b.area() - inter);
}

namespace {

std::vector<PixelRun> normalize_runs(std::vector<PixelRun> runs) {
  std::sort(runs.begin(), runs.end(),
            [](const PixelRun& x, const PixelRun& y) { return x.start < y.start; });
  std::vector<PixelRun> out;
  for (const auto& r : runs) {
    if (r.length <= 0) continue;
    if (!out.empty() && r.start <= out.back().start + out.back().length) {
      auto& last = out.back();
      last.length = std::max(last.start + last.length, r.start + r.length) - last.start;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("mask dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
  }
}

}  // namespace

PixelMask PixelMask::from_runs(int width, int height, std::vector<PixelRun> runs) {
  check_dims(width, height);
  if (runs.empty()) throw ValidationError("mask has no pixels");
  const std::int64_t total = std::int64_t(width) * height;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (r.length <= 0 || r.start < 0 || r.start + r.length > total) {
      throw ValidationError("mask run " + std::to_string(i) + " out of range");
    }
    // Maximal runs: a gap of at least one pixel separates neighbours.
    if (i > 0 && r.start <= runs[i - 1].start + runs[i - 1].length) {
      throw ValidationError("mask runs must be sorted, disjoint and non-adjacent (run " +
                            std::to_string(i) + ")");
    }
  }
  return PixelMask(width, height, std::move(runs));
}

PixelMask PixelMask::from_rle(int width, int height, std::span<const std::int64_t> flat) {
  if (flat.size() % 2 != 0) throw ValidationError("mask_rle must hold start/length pairs");
  std::vector<PixelRun> runs;
  runs.reserve(flat.size() / 2);
  for (std::size_t i = 0; i < flat.size(); i += 2) {
    if (flat[i + 1] <= 0) throw ValidationError("mask_rle run length must be positive");
    runs.push_back({flat[i], flat[i + 1]});
  }
  return from_runs(width, height, normalize_runs(std::move(runs)));
}

std::optional<PixelMask> PixelMask::from_bitmap(int width, int height,
                                                std::span<const std::uint8_t> bits) {
  check_dims(width, height);
  const std::int64_t total = std::int64_t(width) * height;
  if (std::int64_t(bits.size()) != total) throw ValidationError("bitmap size mismatch");
  std::vector<PixelRun> runs;
  std::int64_t i = 0;
  while (i < total) {
    if (!bits[i]) {
      ++i;
      continue;
    }
    std::int64_t j = i;
    while (j < total && bits[j]) ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  if (runs.empty()) return std::nullopt;
  return PixelMask(width, height, std::move(runs));
}

PixelMask PixelMask::from_box(int width, int height, const BoundingBox& box) {
  check_dims(width, height);
  if (!box.valid() || !box.within(width, height)) throw ValidationError("box outside frame");
  std::vector<PixelRun> runs;
  if (box.x_min == 0 && box.x_max == width) {
    runs.push_back({std::int64_t(box.y_min) * width, std::int64_t(box.height()) * width});
  } else {
    for (int y = box.y_min; y < box.y_max; ++y) {
      runs.push_back({std::int64_t(y) * width + box.x_min, box.width()});
    }
  }
  return PixelMask(width, height, std::move(runs));
}

std::vector<std::int64_t> PixelMask::to_rle() const {
  std::vector<std::int64_t> out;
  out.reserve(runs_.size() * 2);
  for (const auto& r : runs_) {
    out.push_back(r.start);
    out.push_back(r.length);
  }
  return out;
}

std::vector<std::uint8_t> PixelMask::to_bitmap() const {
  std::vector<std::uint8_t> bits(std::size_t(width_) * height_, 0);
  for (const auto& r : runs_) std::fill_n(bits.begin() + r.start, r.length, std::uint8_t{1});
  return bits;
}

std::int64_t PixelMask::pixel_count() const {
  std::int64_t n = 0;
  for (const auto& r : runs_) n += r.length;
  return n;
}

BoundingBox PixelMask::bounding_box() const {
  int x0 = width_, y0 = height_, x1 = 0, y1 = 0;
  for (const auto& r : runs_) {
    const std::int64_t last = r.start + r.length - 1;
    const int ya = int(r.start / width_), yb = int(last / width_);
    y0 = std::min(y0, ya);
    y1 = std::max(y1, yb + 1);
    if (ya == yb) {
      x0 = std::min(x0, int(r.start % width_));
      x1 = std::max(x1, int(last % width_) + 1);
    } else {
      // Wrapping run: the first row reaches the right edge, the last row starts at 0.
      x0 = 0;
      x1 = width_;
    }
  }
  return BoundingBox{x0, y0, x1, y1};
}

bool PixelMask::contains(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  const std::int64_t idx = std::int64_t(y) * width_ + x;
  auto it = std::upper_bound(runs_.begin(), runs_.end(), idx,
                             [](std::int64_t v, const PixelRun& r) { return v < r.start; });
  if (it == runs_.begin()) return false;
  --it;
  return idx < it->start + it->length;
}

std::int64_t PixelMask::intersection_count(const PixelMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) {
    throw ValidationError("mask dimension mismatch");
  }
  std::int64_t n = 0;
  std::size_t i = 0, j = 0;
  while (i < runs_.size() && j < other.runs_.size()) {
    const auto& a = runs_[i];
    const auto& b = other.runs_[j];
    const std::int64_t lo = std::max(a.start, b.start);
    const std::int64_t hi = std::min(a.start + a.length, b.start + b.length);
    if (hi > lo) n += hi - lo;
    if (a.start + a.length < b.start + b.length) ++i; else ++j;
  }
  return n;
}

std::int64_t PixelMask::intersection_count(const BoundingBox& box) const {
  const int bx0 = std::max(box.x_min, 0), bx1 = std::min(box.x_max, width_);
  const int by0 = std::max(box.y_min, 0), by1 = std::min(box.y_max, height_);
  if (bx0 >= bx1 || by0 >= by1) return 0;
  std::int64_t n = 0;
  for (const auto& r : runs_) {
    std::int64_t pos = r.start;
    const std::int64_t end = r.start + r.length;
    while (pos < end) {
      const int y = int(pos / width_);
      const std::int64_t row_end = std::min(end, std::int64_t(y + 1) * width_);
      if (y >= by0 && y < by1) {
        const std::int64_t x_lo = std::max<std::int64_t>(pos - std::int64_t(y) * width_, bx0);
        const std::int64_t x_hi = std::min<std::int64_t>(row_end - std::int64_t(y) * width_, bx1);
        if (x_hi > x_lo) n += x_hi - x_lo;
      }
      pos = row_end;
    }
  }
  return n;
}

PixelMask PixelMask::united(const PixelMask& other) const {
  if (width_ != other.width_ || height_ != other.height_) {
    throw ValidationError("mask dimension mismatch");
  }
  std::vector<PixelRun> all = runs_;
  all.insert(all.end(), other.runs_.begin(), other.runs_.end());
  return PixelMask(width_, height_, normalize_runs(std::move(all)));
}

double mask_iou(const PixelMask& a, const PixelMask& b) {
  const std::int64_t inter = a.intersection_count(b);
  if (inter == 0) return 0.0;
  return double(inter) / double(a.pixel_count() + b.pixel_count() - inter);
}

OverlapCounts overlap_counts(const Region& a, const Region& b) {
  if (a.mask && b.mask) {
    return {a.mask->intersection_count(*b.mask), a.mask->pixel_count(), b.mask->pixel_count()};
  }
  return {intersection_area(a.box, b.box), a.box.area(), b.box.area()};
}

double region_overlap(const Region& a, const Region& b) {
  const auto c = overlap_counts(a, b);
  if (c.intersection == 0) return 0.0;
  return double(c.intersection) / double(c.union_area());
}

}  // namespace tubelink
