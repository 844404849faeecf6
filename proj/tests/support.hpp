#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tubelink/synthetic.hpp"
#include "tubelink/types.hpp"

namespace testing {

using namespace tubelink;

inline RegionProposal proposal(int frame, BoundingBox box, ScoreVector scores) {
  return RegionProposal{frame, Region::from_box(box), std::move(scores), std::nullopt};
}

/// A video whose frame t holds the given boxes with the given score vectors.
inline VideoProposals video_of(const std::vector<std::vector<std::pair<BoundingBox, ScoreVector>>>& frames,
                               std::size_t classes, int width = 100, int height = 100) {
  VideoProposals v;
  v.video_id = "v";
  v.frame_width = width;
  v.frame_height = height;
  for (std::size_t c = 0; c < classes; ++c) v.class_names.push_back("c" + std::to_string(c + 1));
  v.frames.resize(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (const auto& [b, s] : frames[t]) v.frames[t].push_back(proposal(int(t) + 1, b, s));
  }
  return v;
}

/// Detection tube with one box for every frame of [t0, t1] and a constant score.
inline ActionTube tube(const std::string& video, ClassId c, int t0, int t1, BoundingBox box, double score = 1.0) {
  ActionTube d;
  d.video_id = video;
  d.class_id = c;
  d.t_start = t0;
  d.t_end = t1;
  d.score = score;
  for (int t = t0; t <= t1; ++t) d.members.push_back(proposal(t, box, {}));
  return d;
}

inline GroundTruthTube gt_tube(const std::string& video, ClassId c, int t0, int t1, BoundingBox box,
                               std::string id = "g") {
  GroundTruthTube g;
  g.video_id = video;
  g.tube_id = std::move(id);
  g.class_id = c;
  g.t_start = t0;
  g.t_end = t1;
  for (int t = t0; t <= t1; ++t) g.extents.push_back(Region::from_box(box));
  return g;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("tubelink-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Pixel set of a box as a row-major bitmap; used as an independent overlap oracle.
inline std::vector<bool> box_pixels(const BoundingBox& b, int width, int height) {
  std::vector<bool> px(std::size_t(width) * std::size_t(height), false);
  for (int y = std::max(0, b.y_min); y < std::min(height, b.y_max); ++y) {
    for (int x = std::max(0, b.x_min); x < std::min(width, b.x_max); ++x) px[std::size_t(y) * width + x] = true;
  }
  return px;
}

inline double bitmap_iou(const std::vector<bool>& a, const std::vector<bool>& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

}  // namespace testing
