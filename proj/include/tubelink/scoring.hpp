#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

using FeatureVector = std::vector<double>;

/// x / ||x||_2. The zero vector is returned unchanged.
FeatureVector l2_normalize(std::span<const double> x);

/// [w_appearance * normalize(x_a) ; w_flow * normalize(x_f)]
FeatureVector fuse_features(std::span<const double> appearance, std::span<const double> flow,
                            double appearance_weight = 1.0, double flow_weight = 1.0);

/// One hyperplane and bias per class: s_c(x) = w_c . x + b_c.
struct LinearModel {
  std::vector<std::string> class_names;
  std::size_t feature_dim = 0;
  std::vector<std::vector<double>> weights;  // C x feature_dim
  std::vector<double> biases;                // C

  std::size_t class_count() const { return biases.size(); }
  /// Throws ValidationError unless every weight vector has feature_dim
  /// finite entries and there is one bias per class.
  void validate() const;
};

/// Throws ValidationError when x.size() != model.feature_dim.
ScoreVector linear_score(std::span<const double> x, const LinearModel& model);

/// JSON {"class_names":[...],"feature_dim":n,"weights":[[...],...],"biases":[...]}.
LinearModel read_linear_model(std::istream& in, const std::string& source = "<stream>");
LinearModel load_linear_model(const std::filesystem::path& path);

/// Appearance and flow descriptors of one proposal.
struct ProposalFeatures {
  std::string video_id;
  int frame = 1;
  std::size_t proposal_index = 0;
  FeatureVector appearance;
  FeatureVector flow;
};

using FeatureKey = std::tuple<std::string, int, std::size_t>;

/// JSON lines {"video_id","frame","proposal_index","x_a":[...],"x_f":[...]}.
/// Duplicate keys are rejected.
std::map<FeatureKey, ProposalFeatures> read_features(std::istream& in, const std::string& source = "<stream>");
std::map<FeatureKey, ProposalFeatures> load_features(const std::filesystem::path& path);

/// Replaces every proposal's score vector (and the class vocabulary) with the
/// model's output on its fused features. Every proposal needs exactly one
/// feature record and every record must name an existing proposal; otherwise
/// ValidationError.
void score_video(VideoProposals& video, const std::map<FeatureKey, ProposalFeatures>& features,
                 const LinearModel& model, double appearance_weight = 1.0, double flow_weight = 1.0);

/// A frame's annotated extent with its class.
struct AnnotatedExtent {
  ClassId class_id = 0;
  Region region;
};

struct PositiveExample {
  std::optional<std::size_t> proposal_index;  // nullopt: the ground-truth extent itself
  std::size_t gt_index = 0;
  ClassId class_id = 0;
  Region region;
};

struct ExamplePartition {
  std::vector<PositiveExample> positives;
  std::vector<std::size_t> negatives;  // proposal indices
  std::vector<std::size_t> ignored;    // proposal indices
};

constexpr double kPositiveIou = 0.75;
constexpr double kNegativeIou = 0.3;

/// Buckets one frame's proposals by their best overlap against the frame's
/// ground truth: > pos_iou positive (class of the best-overlapping extent),
/// < neg_iou negative, otherwise ignored. Every ground-truth extent is also a
/// positive. Throws ValidationError unless pos_iou > neg_iou.
ExamplePartition partition_examples(std::span<const RegionProposal> proposals,
                                    std::span<const AnnotatedExtent> ground_truth,
                                    double pos_iou = kPositiveIou, double neg_iou = kNegativeIou);

}  // namespace tubelink
