#include "tubelink/scoring.hpp"

#include <cmath>
#include <numeric>

#include "json_lines.hpp"

namespace tubelink {

using detail::json;
using detail::LineContext;

FeatureVector l2_normalize(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  FeatureVector out(x.begin(), x.end());
  if (sq == 0.0) return out;
  const double norm = std::sqrt(sq);
  for (double& v : out) v /= norm;
  return out;
}

FeatureVector fuse_features(std::span<const double> appearance, std::span<const double> flow,
                            double appearance_weight, double flow_weight) {
  FeatureVector out;
  out.reserve(appearance.size() + flow.size());
  for (double v : l2_normalize(appearance)) out.push_back(appearance_weight * v);
  for (double v : l2_normalize(flow)) out.push_back(flow_weight * v);
  return out;
}

void LinearModel::validate() const {
  if (weights.size() != biases.size()) {
    throw ValidationError("model has " + std::to_string(weights.size()) + " weight vectors but " +
                          std::to_string(biases.size()) + " biases");
  }
  if (!class_names.empty() && class_names.size() != biases.size()) {
    throw ValidationError("model class_names length differs from the class count");
  }
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (weights[c].size() != feature_dim) {
      throw ValidationError("weight vector " + std::to_string(c) + " has dimension " +
                            std::to_string(weights[c].size()) + ", expected " + std::to_string(feature_dim));
    }
    for (double w : weights[c]) {
      if (!std::isfinite(w)) throw ValidationError("non-finite weight in class " + std::to_string(c));
    }
    if (!std::isfinite(biases[c])) throw ValidationError("non-finite bias in class " + std::to_string(c));
  }
}

ScoreVector linear_score(std::span<const double> x, const LinearModel& model) {
  if (x.size() != model.feature_dim) {
    throw ValidationError("feature dimension " + std::to_string(x.size()) + " does not match the model's " +
                          std::to_string(model.feature_dim));
  }
  ScoreVector s(model.class_count());
  for (std::size_t c = 0; c < s.size(); ++c) {
    s[c] = std::inner_product(x.begin(), x.end(), model.weights[c].begin(), 0.0) + model.biases[c];
  }
  return s;
}

LinearModel read_linear_model(std::istream& in, const std::string& source) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(source + ": malformed JSON (" + e.what() + ")");
  }
  const LineContext ctx{source, 1};
  if (!obj.is_object()) ctx.fail("<record>", "expected a JSON object");
  LinearModel m;
  for (const auto& n : ctx.array(obj, "class_names")) {
    if (!n.is_string()) ctx.fail("class_names", "entries must be strings");
    m.class_names.push_back(n.get<std::string>());
  }
  const long long dim = ctx.integer(obj, "feature_dim");
  if (dim < 0) ctx.fail("feature_dim", "must be >= 0");
  m.feature_dim = std::size_t(dim);
  for (const auto& row : ctx.array(obj, "weights")) {
    if (!row.is_array()) ctx.fail("weights", "expected an array of arrays");
    auto& w = m.weights.emplace_back();
    for (const auto& v : row) w.push_back(ctx.real_value(v, "weights"));
  }
  for (const auto& b : ctx.array(obj, "biases")) m.biases.push_back(ctx.real_value(b, "biases"));
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return m;
}

LinearModel load_linear_model(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  return read_linear_model(in, path.string());
}

std::map<FeatureKey, ProposalFeatures> read_features(std::istream& in, const std::string& source) {
  std::map<FeatureKey, ProposalFeatures> out;
  detail::for_each_json_line(in, source, [&](const LineContext& ctx, const json& obj) {
    ProposalFeatures f;
    f.video_id = ctx.string(obj, "video_id");
    f.frame = int(ctx.integer(obj, "frame"));
    const long long idx = ctx.integer(obj, "proposal_index");
    if (idx < 0) ctx.fail("proposal_index", "must be >= 0");
    f.proposal_index = std::size_t(idx);
    for (const auto& v : ctx.array(obj, "x_a")) f.appearance.push_back(ctx.real_value(v, "x_a"));
    for (const auto& v : ctx.array(obj, "x_f")) f.flow.push_back(ctx.real_value(v, "x_f"));
    FeatureKey key{f.video_id, f.frame, f.proposal_index};
    if (!out.emplace(std::move(key), std::move(f)).second) ctx.fail("proposal_index", "duplicate feature record");
  });
  return out;
}

std::map<FeatureKey, ProposalFeatures> load_features(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  return read_features(in, path.string());
}

void score_video(VideoProposals& video, const std::map<FeatureKey, ProposalFeatures>& features,
                 const LinearModel& model, double appearance_weight, double flow_weight) {
  model.validate();
  std::size_t used = 0;
  for (auto& frame : video.frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      auto& p = frame[i];
      auto it = features.find(FeatureKey{video.video_id, p.frame_index, i});
      if (it == features.end()) {
        throw ValidationError("no features for video '" + video.video_id + "' frame " +
                              std::to_string(p.frame_index) + " proposal " + std::to_string(i));
      }
      const auto x = fuse_features(it->second.appearance, it->second.flow, appearance_weight, flow_weight);
      try {
        p.scores = linear_score(x, model);
      } catch (const ValidationError& e) {
        throw ValidationError("video '" + video.video_id + "' frame " + std::to_string(p.frame_index) +
                              " proposal " + std::to_string(i) + ": " + e.what());
      }
      ++used;
    }
  }
  std::size_t for_video = 0;
  for (const auto& [key, f] : features) for_video += std::get<0>(key) == video.video_id;
  if (for_video != used) {
    throw ValidationError("video '" + video.video_id + "': " + std::to_string(for_video) +
                          " feature records for " + std::to_string(used) + " proposals");
  }
  if (!model.class_names.empty()) {
    video.class_names = model.class_names;
  } else {
    video.class_names.resize(model.class_count());
    for (std::size_t c = 0; c < video.class_names.size(); ++c) {
      if (video.class_names[c].empty()) video.class_names[c] = "class" + std::to_string(c + 1);
    }
  }
}

ExamplePartition partition_examples(std::span<const RegionProposal> proposals,
                                    std::span<const AnnotatedExtent> ground_truth, double pos_iou,
                                    double neg_iou) {
  if (!(pos_iou > neg_iou)) throw ValidationError("positive IoU threshold must exceed the negative one");
  ExamplePartition out;
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    out.positives.push_back({std::nullopt, g, ground_truth[g].class_id, ground_truth[g].region});
  }
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    double best = 0.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      const double o = region_overlap(proposals[i].region, ground_truth[g].region);
      if (o > best) {
        best = o;
        best_gt = g;
      }
    }
    if (best > pos_iou) {
      out.positives.push_back({i, best_gt, ground_truth[best_gt].class_id, proposals[i].region});
    } else if (best < neg_iou) {
      out.negatives.push_back(i);
    } else {
      out.ignored.push_back(i);
    }
  }
  return out;
}

}  // namespace tubelink
