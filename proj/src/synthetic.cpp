#include "tubelink/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_lines.hpp"

namespace tubelink {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t splitmix64(std::uint64_t& z) {
  z += 0x9e3779b97f4a7c15ULL;
  std::uint64_t r = z;
  r = (r ^ (r >> 30)) * 0xbf58476d1ce4e5b9ULL;
  r = (r ^ (r >> 27)) * 0x94d049bb133111ebULL;
  return r ^ (r >> 31);
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() { return double(next() >> 11) * 0x1.0p-53; }

int Xoshiro256::uniform_int(int lo, int hi) {
  const double span = double(hi) - double(lo) + 1.0;
  return std::min(hi, lo + int(std::floor(uniform() * span)));
}

void ScenarioSpec::validate() const {
  if (frame_width <= 0 || frame_height <= 0) throw ValidationError("scenario frame size must be positive");
  if (frame_count < 1) throw ValidationError("scenario needs at least one frame");
  if (class_count < 1) throw ValidationError("scenario needs at least one class");
  if (!class_names.empty() && class_names.size() != class_count) {
    throw ValidationError("class_names length differs from class_count");
  }
  if (distractors_per_frame < 0) throw ValidationError("distractors_per_frame must be >= 0");
  if (!(score_noise >= 0) || !std::isfinite(score_noise)) throw ValidationError("score_noise must be >= 0");
  if (box_jitter < 0) throw ValidationError("box_jitter must be >= 0");
  for (std::size_t i = 0; i < planted.size(); ++i) {
    const auto& p = planted[i];
    const std::string who = "planted tube " + std::to_string(i) + ": ";
    if (p.class_id >= class_count) throw ValidationError(who + "class out of range");
    if (p.t_start < 1 || p.t_end > frame_count || p.t_start > p.t_end) {
      throw ValidationError(who + "interval outside [1, frame_count]");
    }
    if (!(p.margin > 0)) throw ValidationError(who + "margin must be > 0");
    for (const auto& b : {p.box_start, p.box_end}) {
      if (!b.valid() || !b.within(frame_width, frame_height)) throw ValidationError(who + "box outside the frame");
    }
  }
}

BoundingBox planted_box(const PlantedTube& plant, int frame) {
  const int len = plant.t_end - plant.t_start;
  const double f = len == 0 ? 0.0 : double(frame - plant.t_start) / double(len);
  auto lerp = [f](int a, int b) { return int(std::lround(a + f * (b - a))); };
  return BoundingBox{lerp(plant.box_start.x_min, plant.box_end.x_min), lerp(plant.box_start.y_min, plant.box_end.y_min),
                     lerp(plant.box_start.x_max, plant.box_end.x_max), lerp(plant.box_start.y_max, plant.box_end.y_max)};
}

namespace {

BoundingBox jittered(Xoshiro256& rng, BoundingBox b, int jitter, int width, int height) {
  if (jitter == 0) return b;
  b.x_min += rng.uniform_int(-jitter, jitter);
  b.y_min += rng.uniform_int(-jitter, jitter);
  b.x_max += rng.uniform_int(-jitter, jitter);
  b.y_max += rng.uniform_int(-jitter, jitter);
  b.x_min = std::clamp(b.x_min, 0, width - 1);
  b.y_min = std::clamp(b.y_min, 0, height - 1);
  b.x_max = std::clamp(b.x_max, b.x_min + 1, width);
  b.y_max = std::clamp(b.y_max, b.y_min + 1, height);
  return b;
}

BoundingBox random_box(Xoshiro256& rng, int width, int height, int min_size, int max_size) {
  const int w = rng.uniform_int(std::min(min_size, width), std::min(max_size, width));
  const int h = rng.uniform_int(std::min(min_size, height), std::min(max_size, height));
  const int x = rng.uniform_int(0, width - w);
  const int y = rng.uniform_int(0, height - h);
  return BoundingBox{x, y, x + w, y + h};
}

}  // namespace

Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  Xoshiro256 rng(spec.seed);
  Scenario out;
  auto& v = out.video;
  v.video_id = spec.video_id;
  v.frame_width = spec.frame_width;
  v.frame_height = spec.frame_height;
  v.class_names = spec.class_names;
  if (v.class_names.empty()) {
    for (std::size_t c = 0; c < spec.class_count; ++c) v.class_names.push_back("class" + std::to_string(c + 1));
  }
  v.frames.resize(std::size_t(spec.frame_count));

  const int w = spec.frame_width, h = spec.frame_height;
  for (int t = 1; t <= spec.frame_count; ++t) {
    auto& frame = v.frames[std::size_t(t - 1)];
    for (const auto& plant : spec.planted) {
      if (t < plant.t_start || t > plant.t_end) continue;
      RegionProposal p;
      p.frame_index = t;
      p.region = Region::from_box(jittered(rng, planted_box(plant, t), spec.box_jitter, w, h));
      p.scores.resize(spec.class_count);
      for (std::size_t c = 0; c < spec.class_count; ++c) {
        const double noise = spec.score_noise > 0 ? rng.uniform(-spec.score_noise, spec.score_noise) : 0.0;
        p.scores[c] = (c == plant.class_id ? plant.margin : 0.0) + noise;
      }
      frame.push_back(std::move(p));
    }
    for (int d = 0; d < spec.distractors_per_frame; ++d) {
      RegionProposal p;
      p.frame_index = t;
      p.region = Region::from_box(random_box(rng, w, h, std::max(2, w / 10), std::max(2, w / 3)));
      p.scores.resize(spec.class_count);
      for (auto& s : p.scores) s = rng.uniform(-1.0, -0.5);
      frame.push_back(std::move(p));
    }
    // Fisher-Yates, so the linker gets no positional hint.
    for (std::size_t i = frame.size(); i > 1; --i) {
      std::swap(frame[i - 1], frame[std::size_t(rng.uniform_int(0, int(i) - 1))]);
    }
  }

  for (std::size_t i = 0; i < spec.planted.size(); ++i) {
    const auto& plant = spec.planted[i];
    GroundTruthTube g;
    g.video_id = spec.video_id;
    g.tube_id = spec.video_id + "#" + std::to_string(i);
    g.class_id = plant.class_id;
    g.t_start = plant.t_start;
    g.t_end = plant.t_end;
    for (int t = plant.t_start; t <= plant.t_end; ++t) g.extents.push_back(Region::from_box(planted_box(plant, t)));
    out.ground_truth.push_back(std::move(g));
  }
  v.validate();
  return out;
}

ScenarioSpec read_scenario_spec(std::istream& in, const std::string& source) {
  detail::json obj;
  try {
    obj = detail::json::parse(in);
  } catch (const detail::json::parse_error& e) {
    throw ValidationError(source + ": malformed JSON (" + e.what() + ")");
  }
  const detail::LineContext ctx{source, 1};
  if (!obj.is_object()) ctx.fail("<record>", "expected a JSON object");

  auto box = [&](const detail::json& v, const std::string& field) {
    if (!v.is_array() || v.size() != 4) ctx.fail(field, "expected [x_min,y_min,x_max,y_max]");
    for (const auto& x : v) {
      if (!x.is_number_integer()) ctx.fail(field, "box coordinates must be integers");
    }
    return BoundingBox{v[0].get<int>(), v[1].get<int>(), v[2].get<int>(), v[3].get<int>()};
  };

  ScenarioSpec s;
  try {
    if (obj.contains("video_id")) s.video_id = ctx.string(obj, "video_id");
    if (obj.contains("width")) s.frame_width = int(ctx.integer(obj, "width"));
    if (obj.contains("height")) s.frame_height = int(ctx.integer(obj, "height"));
    s.frame_count = int(ctx.integer(obj, "frame_count"));
    if (obj.contains("class_names")) {
      for (const auto& n : ctx.array(obj, "class_names")) {
        if (!n.is_string()) ctx.fail("class_names", "entries must be strings");
        s.class_names.push_back(n.get<std::string>());
      }
      s.class_count = s.class_names.size();
    }
    if (obj.contains("class_count")) s.class_count = std::size_t(ctx.integer(obj, "class_count"));
    ClassVocabulary vocab(s.class_names);
    if (obj.contains("planted")) {
      const auto& planted = ctx.array(obj, "planted");
      for (std::size_t i = 0; i < planted.size(); ++i) {
        const auto& p = planted[i];
        const std::string prefix = "planted[" + std::to_string(i) + "].";
        PlantedTube tube;
        const auto& cls = ctx.require(p, "class");
        if (cls.is_string()) {
          auto id = vocab.find(cls.get<std::string>());
          if (!id) ctx.fail(prefix + "class", "unknown class name");
          tube.class_id = *id;
        } else if (cls.is_number_integer()) {
          const long long ord = cls.get<long long>();
          if (ord < 1 || ord > (long long)s.class_count) ctx.fail(prefix + "class", "ordinal out of range");
          tube.class_id = ClassId(ord - 1);
        } else {
          ctx.fail(prefix + "class", "expected a class name or 1-based ordinal");
        }
        tube.t_start = int(ctx.integer(p, "t_start"));
        tube.t_end = int(ctx.integer(p, "t_end"));
        tube.box_start = box(ctx.require(p, "box_start"), prefix + "box_start");
        tube.box_end = p.contains("box_end") ? box(p["box_end"], prefix + "box_end") : tube.box_start;
        if (p.contains("margin")) tube.margin = ctx.real(p, "margin");
        s.planted.push_back(tube);
      }
    }
    if (obj.contains("distractors_per_frame")) s.distractors_per_frame = int(ctx.integer(obj, "distractors_per_frame"));
    if (obj.contains("score_noise")) s.score_noise = ctx.real(obj, "score_noise");
    if (obj.contains("box_jitter")) s.box_jitter = int(ctx.integer(obj, "box_jitter"));
    if (obj.contains("seed")) {
      const auto& seed = obj["seed"];
      if (!seed.is_number_integer()) ctx.fail("seed", "expected an integer");
      s.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>() : std::uint64_t(seed.get<std::int64_t>());
    }
    s.validate();
  } catch (const detail::json::exception& e) {
    ctx.fail("<record>", e.what());
  } catch (const ValidationError& e) {
    if (std::string(e.what()).rfind(source, 0) == 0) throw;
    throw ValidationError(source + ": " + e.what());
  }
  return s;
}

ScenarioSpec load_scenario_spec(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  return read_scenario_spec(in, path.string());
}

VideoProposals random_video(Xoshiro256& rng, int frame_count, int max_proposals, std::size_t class_count,
                            double empty_probability) {
  VideoProposals v;
  v.video_id = "random";
  v.frame_width = 24;
  v.frame_height = 24;
  for (std::size_t c = 0; c < class_count; ++c) v.class_names.push_back("c" + std::to_string(c + 1));
  v.frames.resize(std::size_t(frame_count));
  for (int t = 1; t <= frame_count; ++t) {
    if (empty_probability > 0 && rng.uniform() < empty_probability) continue;
    const int n = rng.uniform_int(1, max_proposals);
    for (int i = 0; i < n; ++i) {
      RegionProposal p;
      p.frame_index = t;
      p.region = Region::from_box(random_box(rng, v.frame_width, v.frame_height, 4, 14));
      for (std::size_t c = 0; c < class_count; ++c) p.scores.push_back(rng.uniform(-1.0, 1.0));
      v.frames[std::size_t(t - 1)].push_back(std::move(p));
    }
  }
  return v;
}

ActionPath random_path(Xoshiro256& rng, const VideoProposals& video, ClassId c) {
  ActionPath path;
  path.class_id = c;
  for (const auto& frame : video.frames) {
    if (frame.empty()) {
      path.members.push_back(std::nullopt);
    } else {
      path.members.push_back(std::size_t(rng.uniform_int(0, int(frame.size()) - 1)));
    }
  }
  return path;
}

namespace {

constexpr double kTieTolerance = 1e-12;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Counts combinations while guarding against overflow past the limit.
std::uint64_t guarded_product(const std::vector<std::size_t>& sizes) {
  std::uint64_t n = 1;
  for (std::size_t s : sizes) {
    if (s != 0 && n > kOracleLimit / s) return kOracleLimit + 1;
    n *= s;
  }
  return n;
}

}  // namespace

std::pair<ActionPath, double> oracle_best_path(const VideoProposals& video, ClassId c, double lambda,
                                               double placeholder_score) {
  const int T = video.frame_count();
  if (T == 0) throw ValidationError("oracle needs at least one frame");
  if (c >= video.class_count()) throw ValidationError("class id out of range");

  std::vector<std::size_t> sizes(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) sizes[std::size_t(t)] = std::max<std::size_t>(1, video.frames[std::size_t(t)].size());
  if (guarded_product(sizes) > kOracleLimit) throw ValidationError("oracle instance too large");

  auto score = [&](int t, std::size_t i) {
    const auto& f = video.frames[std::size_t(t)];
    return f.empty() ? placeholder_score : f[i].scores[c];
  };
  auto psi = [&](int t, std::size_t i, std::size_t j) {
    const auto& a = video.frames[std::size_t(t)];
    const auto& b = video.frames[std::size_t(t + 1)];
    if (a.empty() || b.empty()) return 0.0;
    return region_overlap(a[i].region, b[j].region);
  };

  std::vector<std::size_t> idx(std::size_t(T), 0), best_idx;
  double best = -std::numeric_limits<double>::infinity();
  // Tie rule: compare member indices from the last frame backwards, lower wins.
  auto prefer = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  };

  while (true) {
    double e = 0.0;
    if (T == 1) {
      e = score(0, idx[0]);
    } else {
      for (int t = 0; t + 1 < T; ++t) {
        e += score(t, idx[std::size_t(t)]) + score(t + 1, idx[std::size_t(t + 1)]) +
             lambda * psi(t, idx[std::size_t(t)], idx[std::size_t(t + 1)]);
      }
      e /= T;
    }
    if (best_idx.empty() || (e > best && !nearly_equal(e, best)) || (nearly_equal(e, best) && prefer(idx, best_idx))) {
      best = e;
      best_idx = idx;
    }
    int t = 0;
    while (t < T && ++idx[std::size_t(t)] == sizes[std::size_t(t)]) idx[std::size_t(t++)] = 0;
    if (t == T) break;
  }

  ActionPath path;
  path.class_id = c;
  path.energy = best;
  for (int t = 0; t < T; ++t) {
    if (video.frames[std::size_t(t)].empty()) {
      path.members.push_back(std::nullopt);
    } else {
      path.members.push_back(best_idx[std::size_t(t)]);
    }
  }
  return {path, best};
}

std::pair<LabelSequence, double> oracle_best_labels(const ActionPath& path, const VideoProposals& video,
                                                    double alpha, double placeholder_score) {
  const std::size_t C = video.class_count();
  const std::size_t T = path.members.size();
  if (C == 0) throw ValidationError("oracle needs at least one class");
  if (guarded_product(std::vector<std::size_t>(T, C)) > kOracleLimit) {
    throw ValidationError("oracle instance too large");
  }

  auto score = [&](std::size_t t, ClassId c) {
    const auto& m = path.members[t];
    return m ? video.frames[t][*m].scores[c] : placeholder_score;
  };
  // Tie rule: smaller label on the last frame, then backwards prefer the
  // next frame's label, then the smaller label.
  auto key = [&](const LabelSequence& l) {
    std::vector<std::size_t> k;
    k.push_back(l.back());
    for (std::size_t t = T - 1; t-- > 0;) k.push_back(l[t] == l[t + 1] ? 0 : l[t] + 1);
    return k;
  };

  LabelSequence labels(T, 0), best_labels;
  double best = -std::numeric_limits<double>::infinity();
  if (T == 0) return {{}, 0.0};
  while (true) {
    double e = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      e += score(t, labels[t]);
      if (t + 1 < T && labels[t] != labels[t + 1]) e -= alpha;
    }
    if (best_labels.empty() || (e > best && !nearly_equal(e, best)) ||
        (nearly_equal(e, best) && key(labels) < key(best_labels))) {
      best = e;
      best_labels = labels;
    }
    std::size_t t = 0;
    while (t < T && ++labels[t] == C) labels[t++] = 0;
    if (t == T) break;
  }
  return {best_labels, best};
}

}  // namespace tubelink
