#include "tubelink/linker.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "tubelink/errors.hpp"
#include "tubelink/ingest.hpp"
#include "tubelink/log.hpp"

namespace tubelink {

double pair_energy(const RegionProposal& a, const RegionProposal& b, ClassId c, double lambda) {
  return pair_energy(PathNode{a.frame_index, &a}, PathNode{b.frame_index, &b}, c, lambda, 0.0);
}

double pair_energy(const PathNode& a, const PathNode& b, ClassId c, double lambda, double placeholder_score) {
  if (b.frame_index != a.frame_index + 1) {
    throw ValidationError("pair_energy needs consecutive frames, got " + std::to_string(a.frame_index) +
                          " and " + std::to_string(b.frame_index));
  }
  const double sa = a.proposal ? a.proposal->scores.at(c) : placeholder_score;
  const double sb = b.proposal ? b.proposal->scores.at(c) : placeholder_score;
  const double psi = (a.proposal && b.proposal) ? region_overlap(a.proposal->region, b.proposal->region) : 0.0;
  return sa + sb + lambda * psi;
}

ProposalPool full_pool(const VideoProposals& video) {
  ProposalPool pool(video.frames.size());
  for (std::size_t t = 0; t < pool.size(); ++t) {
    pool[t].resize(video.frames[t].size());
    std::iota(pool[t].begin(), pool[t].end(), std::size_t{0});
  }
  return pool;
}

namespace {

PathNode node(const VideoProposals& video, int frame, std::optional<std::size_t> idx) {
  return PathNode{frame, idx ? &video.frames[std::size_t(frame - 1)][*idx] : nullptr};
}

/// Candidate members of one frame; a lone nullopt is the placeholder.
std::vector<std::optional<std::size_t>> candidates(const std::vector<std::size_t>& available) {
  if (available.empty()) return {std::nullopt};
  return {available.begin(), available.end()};
}

void check_class(const VideoProposals& video, ClassId c) {
  if (c >= video.class_count()) {
    throw ValidationError("class id " + std::to_string(c) + " outside the video's " +
                          std::to_string(video.class_count()) + " classes");
  }
}

}  // namespace

ActionPath best_path(const VideoProposals& video, ClassId c, double lambda, double placeholder_score) {
  return best_path(video, full_pool(video), c, lambda, placeholder_score);
}

ActionPath best_path(const VideoProposals& video, const ProposalPool& pool, ClassId c, double lambda,
                     double placeholder_score) {
  const int T = video.frame_count();
  if (T == 0) throw ValidationError("cannot link an empty video");
  if (int(pool.size()) != T) throw ValidationError("proposal pool does not cover every frame");
  check_class(video, c);

  std::vector<std::vector<std::optional<std::size_t>>> cand(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) cand[std::size_t(t)] = candidates(pool[std::size_t(t)]);

  ActionPath path;
  path.class_id = c;
  path.members.resize(std::size_t(T));

  if (T == 1) {
    const auto& first = cand[0];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < first.size(); ++j) {
      const auto n = node(video, 1, first[j]);
      const double s = n.proposal ? n.proposal->scores[c] : placeholder_score;
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    path.members[0] = first[best];
    path.energy = best_score;
    return path;
  }

  // value[j]: best accumulated pair energy of a prefix ending at candidate j.
  std::vector<double> value(cand[0].size(), 0.0);
  std::vector<std::vector<std::size_t>> back(static_cast<std::size_t>(T));
  for (int t = 1; t < T; ++t) {
    const auto& prev = cand[std::size_t(t - 1)];
    const auto& cur = cand[std::size_t(t)];
    std::vector<double> next(cur.size());
    auto& bp = back[std::size_t(t)];
    bp.resize(cur.size());
    for (std::size_t j = 0; j < cur.size(); ++j) {
      const auto b = node(video, t + 1, cur[j]);
      double best = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        const double v = value[i] + pair_energy(node(video, t, prev[i]), b, c, lambda, placeholder_score);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      next[j] = best;
      bp[j] = arg;
    }
    value = std::move(next);
  }

  std::size_t j = std::size_t(std::max_element(value.begin(), value.end()) - value.begin());
  path.energy = value[j] / T;
  for (int t = T - 1; t >= 0; --t) {
    path.members[std::size_t(t)] = cand[std::size_t(t)][j];
    if (t > 0) j = back[std::size_t(t)][j];
  }
  return path;
}

double path_energy(const VideoProposals& video, const ActionPath& path, double lambda, double placeholder_score) {
  const int T = path.frame_count();
  if (T == 0) throw ValidationError("empty path");
  if (T == 1) {
    const auto n = node(video, 1, path.members[0]);
    return n.proposal ? n.proposal->scores.at(path.class_id) : placeholder_score;
  }
  double sum = 0.0;
  for (int t = 1; t < T; ++t) {
    sum += pair_energy(node(video, t, path.members[std::size_t(t - 1)]), node(video, t + 1, path.members[std::size_t(t)]),
                       path.class_id, lambda, placeholder_score);
  }
  return sum / T;
}

std::vector<ActionPath> extract_paths(const VideoProposals& video, ClassId c, const LinkerConfig& config) {
  return extract_paths(video, full_pool(video), c, config);
}

std::vector<ActionPath> extract_paths(const VideoProposals& video, ProposalPool pool, ClassId c,
                                      const LinkerConfig& config) {
  if (config.max_paths < 1) throw ValidationError("max_paths must be >= 1");
  std::vector<bool> had_proposals(pool.size());
  for (std::size_t t = 0; t < pool.size(); ++t) had_proposals[t] = !pool[t].empty();

  std::vector<ActionPath> paths;
  while (int(paths.size()) < config.max_paths) {
    bool any_left = false, exhausted = false;
    for (std::size_t t = 0; t < pool.size(); ++t) {
      any_left = any_left || !pool[t].empty();
      exhausted = exhausted || (had_proposals[t] && pool[t].empty());
    }
    if (!any_left || exhausted) break;

    auto path = best_path(video, pool, c, config.lambda, config.placeholder_score);
    for (std::size_t t = 0; t < pool.size(); ++t) {
      if (const auto& m = path.members[t]) std::erase(pool[t], *m);
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

double member_score(const VideoProposals& video, const ActionPath& path, int frame, ClassId c,
                    double placeholder_score) {
  const auto& m = path.members[std::size_t(frame - 1)];
  return m ? video.frames[std::size_t(frame - 1)][*m].scores.at(c) : placeholder_score;
}

LabelSequence temporal_label(const ActionPath& path, const VideoProposals& video, double alpha,
                             double placeholder_score) {
  const std::size_t C = video.class_count();
  const int T = path.frame_count();
  if (C == 0) throw ValidationError("temporal labelling needs at least one class");
  if (T == 0) return {};

  // Columns 0..T of the C x (T+1) table; column 0 is all zeros.
  std::vector<double> column(C, 0.0);
  std::vector<std::vector<ClassId>> back(std::size_t(T) + 1, std::vector<ClassId>(C, 0));
  for (int t = 1; t <= T; ++t) {
    std::vector<double> next(C);
    for (ClassId c = 0; c < C; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      ClassId arg = 0;
      for (ClassId prev = 0; prev < C; ++prev) {
        const double v = column[prev] - smoothness_potential(prev, c, alpha);
        if (v > best || (v == best && prev == c)) {
          best = v;
          arg = prev;
        }
      }
      next[c] = member_score(video, path, t, c, placeholder_score) + best;
      back[std::size_t(t)][c] = arg;
    }
    column = std::move(next);
  }

  LabelSequence labels(static_cast<std::size_t>(T));
  ClassId c = ClassId(std::max_element(column.begin(), column.end()) - column.begin());
  for (int t = T; t >= 1; --t) {
    labels[std::size_t(t - 1)] = c;
    c = back[std::size_t(t)][c];
  }
  return labels;
}

double labelling_energy(const ActionPath& path, const VideoProposals& video, const LabelSequence& labels,
                        double alpha, double placeholder_score) {
  double e = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    e += member_score(video, path, int(t) + 1, labels[t], placeholder_score);
    if (t + 1 < labels.size()) e -= smoothness_potential(labels[t], labels[t + 1], alpha);
  }
  return e;
}

std::vector<ActionTube> extract_tubes(const ActionPath& path, const LabelSequence& labels,
                                      const VideoProposals& video) {
  if (labels.size() != path.members.size()) throw ValidationError("label sequence length differs from the path");
  std::vector<ActionTube> tubes;
  std::optional<ActionTube> open;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto& m = path.members[t];
    if (labels[t] == path.class_id && m) {
      if (!open) {
        open.emplace();
        open->video_id = video.video_id;
        open->class_id = path.class_id;
        open->t_start = int(t) + 1;
      }
      open->t_end = int(t) + 1;
      open->members.push_back(video.frames[t][*m]);
    } else if (open) {
      tubes.push_back(std::move(*open));
      open.reset();
    }
  }
  if (open) tubes.push_back(std::move(*open));
  return tubes;
}

double tube_score(const ActionTube& tube, int top_k) {
  if (tube.members.empty()) throw ValidationError("cannot score an empty tube");
  if (top_k < 1) throw ValidationError("top_k must be >= 1");
  std::vector<double> s;
  s.reserve(tube.members.size());
  for (const auto& m : tube.members) {
    if (tube.class_id >= m.scores.size()) throw ValidationError("tube member lacks a score for its class");
    s.push_back(m.scores[tube.class_id]);
  }
  const std::size_t k = std::min(std::size_t(top_k), s.size());
  std::partial_sort(s.begin(), s.begin() + std::ptrdiff_t(k), s.end(), std::greater<>());
  return std::accumulate(s.begin(), s.begin() + std::ptrdiff_t(k), 0.0) / double(k);
}

double tube_average_area(const ActionTube& tube) {
  if (tube.members.empty()) return 0.0;
  double w = 0.0, h = 0.0;
  for (const auto& m : tube.members) {
    w += m.region.box.width();
    h += m.region.box.height();
  }
  const double n = double(tube.members.size());
  return (w / n) * (h / n);
}

std::vector<ActionTube> filter_tubes(std::vector<ActionTube> tubes, const LinkerConfig& config) {
  std::set<ClassId> warned;
  std::erase_if(tubes, [&](const ActionTube& tube) {
    if (tube.score < 0.0) return true;
    if (tube.length() < config.min_length) return true;
    auto it = config.class_area.find(tube.class_id);
    if (it == config.class_area.end()) {
      if (!config.class_area.empty() && warned.insert(tube.class_id).second) {
        log::warn("no average area for class " + std::to_string(tube.class_id + 1) + "; area filter skipped");
      }
      return false;
    }
    return tube_average_area(tube) < it->second / config.area_divisor;
  });
  return tubes;
}

std::vector<ActionTube> link_video(const VideoProposals& video, const LinkerConfig& config) {
  config.validate();
  video.validate();
  std::vector<ActionTube> out;
  if (video.frame_count() == 0) return out;
  for (ClassId c = 0; c < video.class_count(); ++c) {
    ProposalPool pool(video.frames.size());
    for (std::size_t t = 0; t < pool.size(); ++t) pool[t] = nms_indices(video.frames[t], c, config.nms_iou);

    for (const auto& path : extract_paths(video, std::move(pool), c, config)) {
      const auto labels = temporal_label(path, video, config.alpha, config.placeholder_score);
      auto tubes = extract_tubes(path, labels, video);
      for (auto& tube : tubes) tube.score = tube_score(tube, config.top_k_score);
      for (auto& tube : filter_tubes(std::move(tubes), config)) out.push_back(std::move(tube));
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ActionTube& a, const ActionTube& b) { return a.score > b.score; });
  return out;
}

}  // namespace tubelink
