#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

/// A path member on one frame; a null proposal is a placeholder standing in
/// for a frame with no available proposal (score placeholder_score for every
/// class, zero overlap with everything).
struct PathNode {
  int frame_index = 1;
  const RegionProposal* proposal = nullptr;
};

/// s_c(a) + s_c(b) + lambda * IoU(a, b). Throws ValidationError unless b lies
/// on the frame right after a.
double pair_energy(const RegionProposal& a, const RegionProposal& b, ClassId c, double lambda);
double pair_energy(const PathNode& a, const PathNode& b, ClassId c, double lambda, double placeholder_score);

/// Available proposal indices per frame (pool[t - 1] for frame t), ascending.
using ProposalPool = std::vector<std::vector<std::size_t>>;

ProposalPool full_pool(const VideoProposals& video);

/// Maximises (1/T) * sum_{t<T} pair_energy(r_t, r_{t+1}) over one proposal per
/// frame by forward dynamic programming with backtracking. Interior unary
/// scores enter two pair terms each, exactly as the sum is written. Ties go to
/// the lower proposal index, deciding from the last frame backwards. For T = 1
/// the energy is the best single score. Throws ValidationError for T = 0.
ActionPath best_path(const VideoProposals& video, ClassId c, double lambda, double placeholder_score = 0.0);
ActionPath best_path(const VideoProposals& video, const ProposalPool& pool, ClassId c, double lambda,
                     double placeholder_score = 0.0);

/// The objective above evaluated on a given path.
double path_energy(const VideoProposals& video, const ActionPath& path, double lambda,
                   double placeholder_score = 0.0);

/// Repeated best_path, removing each path's members from the pool, until
/// max_paths are found or a frame that had proposals runs out.
std::vector<ActionPath> extract_paths(const VideoProposals& video, ClassId c, const LinkerConfig& config);
std::vector<ActionPath> extract_paths(const VideoProposals& video, ProposalPool pool, ClassId c,
                                      const LinkerConfig& config);

/// 0 for equal labels, alpha otherwise.
inline double smoothness_potential(ClassId a, ClassId b, double alpha) { return a == b ? 0.0 : alpha; }

/// Score of class c for the path's member on frame t (1-based).
double member_score(const VideoProposals& video, const ActionPath& path, int frame, ClassId c,
                    double placeholder_score = 0.0);

/// Piecewise-constant relabelling of a path: maximises
/// sum_t s_{c_t}(r_t) - sum_t V(c_t, c_{t+1}) with a Viterbi pass over a
/// C x (T+1) table. Ties prefer the smaller class id at the last frame and, while
/// backtracking, the label already chosen for the next frame.
LabelSequence temporal_label(const ActionPath& path, const VideoProposals& video, double alpha,
                             double placeholder_score = 0.0);

double labelling_energy(const ActionPath& path, const VideoProposals& video, const LabelSequence& labels,
                        double alpha, double placeholder_score = 0.0);

/// Maximal runs of frames labelled with the path's class, split at placeholder
/// frames. Scores are left at zero.
std::vector<ActionTube> extract_tubes(const ActionPath& path, const LabelSequence& labels,
                                      const VideoProposals& video);

/// Mean of the top min(top_k, length) member scores for the tube's class.
double tube_score(const ActionTube& tube, int top_k);

/// Mean box width times mean box height over the tube's members.
double tube_average_area(const ActionTube& tube);

/// Keeps tubes with score >= 0, length >= min_length and, when the class has an
/// area entry, average area >= class_area / area_divisor.
std::vector<ActionTube> filter_tubes(std::vector<ActionTube> tubes, const LinkerConfig& config);

/// Full pipeline for one video: per class, NMS-pruned pool, path extraction,
/// labelling, tube extraction, scoring and filtering. Sorted by descending
/// score (ties keep class order).
std::vector<ActionTube> link_video(const VideoProposals& video, const LinkerConfig& config);

}  // namespace tubelink
