#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tubelink/geometry.hpp"

namespace tubelink {

/// Class ids are 0-based indices into the video's class_names. Files carry
/// class names (or 1-based integers); see ClassVocabulary.
using ClassId = std::size_t;

/// Per-class classifier margins, one per class. Unbounded, finite.
using ScoreVector = std::vector<double>;

/// One frame-level detection hypothesis.
struct RegionProposal {
  int frame_index = 1;  // 1-based
  Region region;
  ScoreVector scores;
  std::optional<double> actionness;

  const BoundingBox& box() const { return region.box; }
  double score(ClassId c) const { return scores[c]; }
};

/// All proposals of one video. frames[t - 1] holds the proposals of frame t.
struct VideoProposals {
  std::string video_id;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<std::string> class_names;
  std::vector<std::vector<RegionProposal>> frames;

  int frame_count() const { return int(frames.size()); }
  std::size_t class_count() const { return class_names.size(); }

  /// Throws ValidationError if any invariant is violated: frame ordinals match
  /// positions, score vectors have C finite entries, boxes lie in the frame,
  /// masks match their boxes and the frame dimensions.
  void validate() const;
};

/// A full-length chain of proposals for one class. members[t - 1] is the index
/// of the chosen proposal in frame t, or nullopt for a placeholder (the frame
/// had no available proposal).
struct ActionPath {
  ClassId class_id = 0;
  std::vector<std::optional<std::size_t>> members;
  double energy = 0.0;

  int frame_count() const { return int(members.size()); }
  bool is_placeholder(int frame) const { return !members[std::size_t(frame - 1)].has_value(); }
  std::vector<bool> placeholder_flags() const;
};

/// Per-frame class labels c_1..c_T.
using LabelSequence = std::vector<ClassId>;

/// A temporally contiguous, class-labelled segment of an action path.
struct ActionTube {
  std::string video_id;
  ClassId class_id = 0;
  int t_start = 1;
  int t_end = 1;
  std::vector<RegionProposal> members;  // members[i] lies on frame t_start + i
  double score = 0.0;

  int length() const { return t_end - t_start + 1; }
  const Region& region_at(int frame) const { return members[std::size_t(frame - t_start)].region; }
};

struct GroundTruthTube {
  std::string video_id;
  std::string tube_id;
  ClassId class_id = 0;
  int t_start = 1;
  int t_end = 1;
  std::vector<Region> extents;  // extents[i] lies on frame t_start + i

  int length() const { return t_end - t_start + 1; }
  const Region& region_at(int frame) const { return extents[std::size_t(frame - t_start)]; }
};

/// Maps class names to ids. A closed vocabulary rejects unknown names; an
/// open one appends them.
class ClassVocabulary {
 public:
  ClassVocabulary() = default;
  explicit ClassVocabulary(std::vector<std::string> names, bool open = false);

  static ClassVocabulary open_vocabulary() { return ClassVocabulary({}, true); }

  bool is_open() const { return open_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(ClassId id) const { return names_.at(id); }

  std::optional<ClassId> find(std::string_view name) const;
  /// Looks a name up, appending it when the vocabulary is open.
  /// Throws ValidationError for an unknown name in a closed vocabulary.
  ClassId resolve(std::string_view name);
  /// 1-based integer class ordinal. Throws ValidationError when out of range.
  ClassId resolve_ordinal(long long ordinal) const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, ClassId, std::less<>> index_;
  bool open_ = false;
};

struct LinkerConfig {
  double lambda = 1.0;           // pairwise IoU weight in the link energy
  double alpha = 3.0;            // label-change penalty
  int max_paths = 3;             // paths extracted per class
  int min_length = 20;           // delta: shortest tube kept, in frames
  double area_divisor = 2.2;     // tau: gamma = class_area / tau
  std::map<ClassId, double> class_area;  // gamma_c, pixels^2
  double nms_iou = 0.3;
  double actionness_threshold = 0.003;
  int top_k_score = 10;
  double placeholder_score = 0.0;

  /// Throws ValidationError when a field is out of its domain.
  void validate() const;
};

}  // namespace tubelink
