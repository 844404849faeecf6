#include "tubelink/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tubelink/errors.hpp"

namespace tubelink {

double FlowMagnitudeMap::total() const {
  return std::accumulate(magnitudes.begin(), magnitudes.end(), 0.0);
}

void FlowMagnitudeMap::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("flow map dimensions must be positive");
  if (magnitudes.size() != std::size_t(width) * height) {
    throw ValidationError("flow map of frame " + std::to_string(frame) + " has " +
                          std::to_string(magnitudes.size()) + " values, expected " +
                          std::to_string(std::size_t(width) * height));
  }
  for (double v : magnitudes) {
    if (!std::isfinite(v) || v < 0) {
      throw ValidationError("flow map of frame " + std::to_string(frame) + " has a negative or non-finite value");
    }
  }
}

namespace {

/// Summed-area table: sum over [0,x) x [0,y).
class FlowIntegral {
 public:
  explicit FlowIntegral(const FlowMagnitudeMap& flow)
      : w_(flow.width), h_(flow.height), table_(std::size_t(w_ + 1) * (h_ + 1), 0.0) {
    for (int y = 0; y < h_; ++y) {
      double row = 0.0;
      for (int x = 0; x < w_; ++x) {
        row += flow.at(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  double total() const { return at(w_, h_); }

  double box_sum(int x0, int y0, int x1, int y1) const {
    x0 = std::clamp(x0, 0, w_);
    x1 = std::clamp(x1, 0, w_);
    y0 = std::clamp(y0, 0, h_);
    y1 = std::clamp(y1, 0, h_);
    if (x0 >= x1 || y0 >= y1) return 0.0;
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

  double region_sum(const Region& region) const {
    if (!region.mask) {
      const auto& b = region.box;
      return box_sum(b.x_min, b.y_min, b.x_max, b.y_max);
    }
    double s = 0.0;
    for (const auto& r : region.mask->runs()) {
      std::int64_t pos = r.start;
      const std::int64_t end = r.start + r.length;
      while (pos < end) {
        const int y = int(pos / w_);
        const std::int64_t row_end = std::min(end, std::int64_t(y + 1) * w_);
        const int x0 = int(pos - std::int64_t(y) * w_);
        const int x1 = int(row_end - std::int64_t(y) * w_);
        s += box_sum(x0, y, x1, y + 1);
        pos = row_end;
      }
    }
    return s;
  }

 private:
  double& at(int x, int y) { return table_[std::size_t(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return table_[std::size_t(y) * (w_ + 1) + x]; }

  int w_, h_;
  std::vector<double> table_;
};

double ratio(const FlowIntegral& integral, const Region& region) {
  const double total = integral.total();
  if (total <= 0.0) return 0.0;
  return std::clamp(integral.region_sum(region) / total, 0.0, 1.0);
}

void check_region_dims(const Region& region, const FlowMagnitudeMap& flow) {
  if (region.mask && (region.mask->width() != flow.width || region.mask->height() != flow.height)) {
    throw ValidationError("flow map dimensions differ from the region's frame");
  }
}

}  // namespace

double actionness(const Region& region, const FlowMagnitudeMap& flow) {
  flow.validate();
  check_region_dims(region, flow);
  return ratio(FlowIntegral(flow), region);
}

std::vector<RegionProposal> prune_by_actionness(std::span<const RegionProposal> proposals,
                                                const FlowMagnitudeMap& flow, double threshold) {
  flow.validate();
  const FlowIntegral integral(flow);
  std::vector<RegionProposal> kept;
  for (const auto& p : proposals) {
    check_region_dims(p.region, flow);
    const double mu = ratio(integral, p.region);
    if (mu >= threshold) {
      kept.push_back(p);
      kept.back().actionness = mu;
    }
  }
  return kept;
}

std::vector<std::size_t> nms_indices(std::span<const RegionProposal> proposals, ClassId class_id,
                                     double iou_threshold) {
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proposals[a].scores.at(class_id) > proposals[b].scores.at(class_id);
  });

  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return region_overlap(proposals[i].region, proposals[k].region) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<RegionProposal> nms(std::span<const RegionProposal> proposals, ClassId class_id,
                                double iou_threshold) {
  std::vector<RegionProposal> out;
  for (std::size_t i : nms_indices(proposals, class_id, iou_threshold)) out.push_back(proposals[i]);
  return out;
}

std::vector<PixelMask> connected_components(const BinarySegmentation& seg) {
  if (!seg.foreground) return {};
  const int w = seg.width, h = seg.height;
  const auto bits = seg.foreground->to_bitmap();
  std::vector<int> label(bits.size(), -1);
  std::vector<std::int64_t> stack;
  int count = 0;

  for (std::int64_t start = 0; start < std::int64_t(bits.size()); ++start) {
    if (!bits[start] || label[start] >= 0) continue;
    label[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::int64_t idx = stack.back();
      stack.pop_back();
      const int x = int(idx % w), y = int(idx / w);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const std::int64_t n = std::int64_t(ny) * w + nx;
          if (bits[n] && label[n] < 0) {
            label[n] = count;
            stack.push_back(n);
          }
        }
      }
    }
    ++count;
  }

  std::vector<std::vector<PixelRun>> runs(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < std::int64_t(label.size()); ++i) {
    if (label[i] < 0) continue;
    auto& r = runs[std::size_t(label[i])];
    if (!r.empty() && r.back().start + r.back().length == i) {
      ++r.back().length;
    } else {
      r.push_back({i, 1});
    }
  }
  std::vector<PixelMask> out;
  out.reserve(runs.size());
  for (auto& r : runs) out.push_back(PixelMask::from_runs(w, h, std::move(r)));
  return out;
}

std::vector<RegionProposal> powerset_proposals(std::span<const PixelMask> components,
                                               int frame_index, std::size_t class_count,
                                               std::size_t cap) {
  if (components.empty()) return {};
  if (cap == 0 || cap > 30) throw ValidationError("power-set cap must lie in [1,30]");

  std::vector<std::size_t> chosen(components.size());
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (chosen.size() > cap) {
    std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
      return components[a].pixel_count() > components[b].pixel_count();
    });
    chosen.resize(cap);
    std::sort(chosen.begin(), chosen.end());
  }

  const std::size_t n = chosen.size();
  std::vector<RegionProposal> out;
  out.reserve((std::size_t{1} << n) - 1);
  for (std::uint32_t subset = 1; subset < (std::uint32_t{1} << n); ++subset) {
    std::optional<PixelMask> mask;
    for (std::size_t k = 0; k < n; ++k) {
      if (!(subset & (std::uint32_t{1} << k))) continue;
      const auto& m = components[chosen[k]];
      mask = mask ? mask->united(m) : m;
    }
    RegionProposal p;
    p.frame_index = frame_index;
    p.region = Region::from_mask(std::move(*mask));
    p.scores.assign(class_count, 0.0);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace tubelink
