#include "tubelink/types.hpp"

#include <cmath>

#include "tubelink/errors.hpp"

namespace tubelink {

void VideoProposals::validate() const {
  const std::string where = "video '" + video_id + "': ";
  if (frame_width <= 0 || frame_height <= 0) throw ValidationError(where + "frame size must be positive");
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t i = 0; i < frames[t].size(); ++i) {
      const auto& p = frames[t][i];
      const std::string at = where + "frame " + std::to_string(t + 1) + " proposal " + std::to_string(i) + ": ";
      if (p.frame_index != int(t) + 1) throw ValidationError(at + "frame_index mismatch");
      if (p.scores.size() != class_names.size()) {
        throw ValidationError(at + "expected " + std::to_string(class_names.size()) + " scores, got " +
                              std::to_string(p.scores.size()));
      }
      for (double s : p.scores) {
        if (!std::isfinite(s)) throw ValidationError(at + "non-finite score");
      }
      if (!p.region.box.valid() || !p.region.box.within(frame_width, frame_height)) {
        throw ValidationError(at + "box invalid or outside the frame");
      }
      if (p.region.mask) {
        const auto& m = *p.region.mask;
        if (m.width() != frame_width || m.height() != frame_height) {
          throw ValidationError(at + "mask dimensions differ from the frame");
        }
        if (m.bounding_box() != p.region.box) {
          throw ValidationError(at + "box is not the minimum bounding box of the mask");
        }
      }
      if (p.actionness && !(*p.actionness >= 0.0 && *p.actionness <= 1.0)) {
        throw ValidationError(at + "actionness outside [0,1]");
      }
    }
  }
}

std::vector<bool> ActionPath::placeholder_flags() const {
  std::vector<bool> flags(members.size());
  for (std::size_t t = 0; t < members.size(); ++t) flags[t] = !members[t].has_value();
  return flags;
}

ClassVocabulary::ClassVocabulary(std::vector<std::string> names, bool open) : open_(open) {
  for (auto& n : names) {
    if (index_.count(n)) throw ValidationError("duplicate class name '" + n + "'");
    index_.emplace(n, names_.size());
    names_.push_back(std::move(n));
  }
}

std::optional<ClassId> ClassVocabulary::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ClassId ClassVocabulary::resolve(std::string_view name) {
  if (auto id = find(name)) return *id;
  if (!open_) throw ValidationError("unknown class name '" + std::string(name) + "'");
  index_.emplace(std::string(name), names_.size());
  names_.emplace_back(name);
  return names_.size() - 1;
}

ClassId ClassVocabulary::resolve_ordinal(long long ordinal) const {
  if (ordinal < 1 || ordinal > (long long)names_.size()) {
    throw ValidationError("class ordinal " + std::to_string(ordinal) + " outside 1.." +
                          std::to_string(names_.size()));
  }
  return ClassId(ordinal - 1);
}

void LinkerConfig::validate() const {
  if (!(lambda >= 0)) throw ValidationError("lambda must be >= 0");
  if (!(alpha >= 0)) throw ValidationError("alpha must be >= 0");
  if (max_paths < 1) throw ValidationError("max_paths must be >= 1");
  if (min_length < 1) throw ValidationError("delta must be >= 1");
  if (!(area_divisor > 0)) throw ValidationError("tau must be > 0");
  if (!(nms_iou > 0 && nms_iou < 1)) throw ValidationError("nms_iou must lie in (0,1)");
  if (!(actionness_threshold >= 0 && actionness_threshold <= 1)) {
    throw ValidationError("actionness_threshold must lie in [0,1]");
  }
  if (top_k_score < 1) throw ValidationError("top_k_score must be >= 1");
  if (!std::isfinite(placeholder_score)) throw ValidationError("placeholder_score must be finite");
  for (const auto& [c, area] : class_area) {
    if (!(area >= 0) || !std::isfinite(area)) throw ValidationError("class area must be finite and >= 0");
  }
}

}  // namespace tubelink
