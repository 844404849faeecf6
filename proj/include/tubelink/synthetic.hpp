#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tubelink/types.hpp"

namespace tubelink {

/// xoshiro256** (Blackman & Vigna), seeded by expanding a 64-bit seed with
/// splitmix64. Bit-reproducible on every platform:
///   splitmix64: z += 0x9e3779b97f4a7c15; z = (z ^ z>>30) * 0xbf58476d1ce4e5b9;
///               z = (z ^ z>>27) * 0x94d049bb133111eb; return z ^ z>>31
///   next: r = rotl(s1 * 5, 7) * 9; t = s1 << 17; s2 ^= s0; s3 ^= s1;
///         s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
/// uniform() = (next() >> 11) * 2^-53.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// [0, 1)
  double uniform();
  /// [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  int uniform_int(int lo, int hi);

 private:
  std::array<std::uint64_t, 4> s_{};
};

struct PlantedTube {
  ClassId class_id = 0;
  int t_start = 1;
  int t_end = 1;
  BoundingBox box_start;  // trajectory is a linear interpolation between these
  BoundingBox box_end;
  double margin = 1.0;
};

struct ScenarioSpec {
  std::string video_id = "synthetic";
  int frame_width = 320;
  int frame_height = 240;
  int frame_count = 100;
  std::size_t class_count = 3;
  std::vector<std::string> class_names;  // defaults to class1..classC
  std::vector<PlantedTube> planted;
  int distractors_per_frame = 0;
  double score_noise = 0.0;  // plant scores get U(-noise, noise) on every class
  int box_jitter = 0;        // plant boxes get U{-jitter..jitter} per coordinate
  std::uint64_t seed = 0;

  /// Throws ValidationError on intervals outside [1,T], margins <= 0,
  /// negative amplitudes or boxes outside the frame.
  void validate() const;
};

struct Scenario {
  VideoProposals video;
  std::vector<GroundTruthTube> ground_truth;
};

/// Deterministic under the seed. Each planted tube yields one proposal per
/// covered frame scoring margin + noise on its class and noise elsewhere;
/// distractors score U[-1, -0.5) on every class. Ground truth mirrors the
/// un-jittered plant trajectories. Proposal order within a frame is shuffled.
Scenario generate_scenario(const ScenarioSpec& spec);

/// Interpolated (un-jittered) box of a plant on frame t.
BoundingBox planted_box(const PlantedTube& plant, int frame);

/// JSON: {"video_id","width","height","frame_count","class_count"|"class_names",
/// "planted":[{"class","t_start","t_end","box_start","box_end","margin"}],
/// "distractors_per_frame","score_noise","box_jitter","seed"}. Plant classes are
/// names or 1-based ordinals.
ScenarioSpec read_scenario_spec(std::istream& in, const std::string& source = "<stream>");
ScenarioSpec load_scenario_spec(const std::filesystem::path& path);

/// Small random video for property tests: boxes are drawn inside a small
/// frame so neighbours overlap often; scores are U[-1, 1). Each frame holds
/// 1..max_proposals proposals, or none with probability empty_probability.
VideoProposals random_video(Xoshiro256& rng, int frame_count, int max_proposals, std::size_t class_count,
                            double empty_probability = 0.0);

/// A path choosing a uniformly random proposal (or placeholder) per frame.
ActionPath random_path(Xoshiro256& rng, const VideoProposals& video, ClassId c);

constexpr std::uint64_t kOracleLimit = 1'000'000;

/// Exhaustive maximisation of the linking objective over every combination of
/// one proposal per frame (placeholder for empty frames), with best_path's tie
/// rule. Throws ValidationError if there are more than kOracleLimit paths.
std::pair<ActionPath, double> oracle_best_path(const VideoProposals& video, ClassId c, double lambda,
                                               double placeholder_score = 0.0);

/// Exhaustive maximisation of the labelling energy over all C^T label
/// sequences, with temporal_label's tie rule. Throws ValidationError beyond
/// kOracleLimit sequences.
std::pair<LabelSequence, double> oracle_best_labels(const ActionPath& path, const VideoProposals& video,
                                                    double alpha, double placeholder_score = 0.0);

}  // namespace tubelink
