#include <doctest.h>

#include <map>
#include <sstream>

#include "tubelink/errors.hpp"
#include "tubelink/io.hpp"
#include "tubelink/synthetic.hpp"

using namespace tubelink;

namespace {

ScenarioSpec two_plants() {
  ScenarioSpec spec;
  spec.frame_count = 40;
  spec.class_count = 4;
  spec.distractors_per_frame = 5;
  spec.seed = 9;
  spec.planted = {PlantedTube{0, 1, 30, BoundingBox{10, 10, 50, 50}, BoundingBox{100, 40, 150, 100}, 1.0},
                  PlantedTube{3, 10, 40, BoundingBox{200, 10, 260, 80}, BoundingBox{200, 10, 260, 80}, 2.0}};
  return spec;
}

std::string dump(const VideoProposals& v) {
  std::ostringstream out;
  write_proposals(out, v);
  return out.str();
}

}  // namespace

TEST_CASE("xoshiro256** reference outputs") {
  Xoshiro256 zero(0);
  CHECK(zero.next() == 0x99ec5f36cb75f2b4ULL);
  CHECK(zero.next() == 0xbf6e1f784956452aULL);
  CHECK(zero.next() == 0x1a5f849d4933e6e0ULL);
  Xoshiro256 other(42);
  CHECK(other.next() == 0x15780b2e0c2ec716ULL);

  Xoshiro256 a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = a.uniform_int(-3, 3);
    CHECK(k == b.uniform_int(-3, 3));
    CHECK(k >= -3);
    CHECK(k <= 3);
  }
}

TEST_CASE("planted_box interpolates linearly") {
  const PlantedTube p{0, 11, 21, BoundingBox{0, 0, 10, 10}, BoundingBox{100, 50, 120, 70}, 1.0};
  CHECK(planted_box(p, 11) == p.box_start);
  CHECK(planted_box(p, 21) == p.box_end);
  CHECK(planted_box(p, 16) == BoundingBox{50, 25, 65, 40});
  const PlantedTube still{0, 4, 4, BoundingBox{1, 2, 3, 4}, BoundingBox{9, 9, 19, 19}, 1.0};
  CHECK(planted_box(still, 4) == still.box_start);
}

TEST_CASE("generation is deterministic under the seed") {
  auto spec = two_plants();
  spec.score_noise = 0.3;
  spec.box_jitter = 2;
  const auto a = generate_scenario(spec);
  const auto b = generate_scenario(spec);
  CHECK(dump(a.video) == dump(b.video));
  spec.seed = 10;
  CHECK(dump(generate_scenario(spec).video) != dump(a.video));
}

TEST_CASE("noise-free plants appear verbatim with distractors below zero") {
  const auto spec = two_plants();
  const auto s = generate_scenario(spec);
  s.video.validate();
  REQUIRE(s.video.frames.size() == 40);
  for (int t = 1; t <= 40; ++t) {
    const auto& frame = s.video.frames[std::size_t(t - 1)];
    std::size_t expected = 5;
    for (const auto& p : spec.planted) expected += (t >= p.t_start && t <= p.t_end);
    CHECK(frame.size() == expected);
    std::map<ClassId, int> found;
    for (const auto& prop : frame) {
      CHECK(prop.frame_index == t);
      const auto best = std::max_element(prop.scores.begin(), prop.scores.end());
      if (*best < 0) {
        for (double x : prop.scores) {
          CHECK(x >= -1.0);
          CHECK(x < -0.5);
        }
        continue;
      }
      const ClassId c = ClassId(best - prop.scores.begin());
      ++found[c];
      const auto& plant = c == 0 ? spec.planted[0] : spec.planted[1];
      CHECK(prop.box() == planted_box(plant, t));
      CHECK(*best == plant.margin);
      for (std::size_t k = 0; k < prop.scores.size(); ++k)
        if (k != c) CHECK(prop.scores[k] == 0.0);
    }
    for (std::size_t i = 0; i < spec.planted.size(); ++i) {
      const auto& p = spec.planted[i];
      CHECK(found[p.class_id] == int(t >= p.t_start && t <= p.t_end));
    }
  }
}

TEST_CASE("ground truth mirrors the plants") {
  auto spec = two_plants();
  spec.box_jitter = 4;
  const auto s = generate_scenario(spec);
  REQUIRE(s.ground_truth.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& g = s.ground_truth[i];
    const auto& p = spec.planted[i];
    CHECK(g.video_id == spec.video_id);
    CHECK(g.tube_id == spec.video_id + "#" + std::to_string(i));
    CHECK(g.class_id == p.class_id);
    CHECK(g.t_start == p.t_start);
    CHECK(g.t_end == p.t_end);
    for (int t = p.t_start; t <= p.t_end; ++t) CHECK(g.region_at(t).box == planted_box(p, t));
  }
  // Concurrent plants overlap in time.
  CHECK(s.ground_truth[1].t_start <= s.ground_truth[0].t_end);
}

TEST_CASE("jittered boxes stay in the frame and near the plant") {
  auto spec = two_plants();
  spec.box_jitter = 3;
  spec.score_noise = 0.2;
  spec.planted[0].box_start = BoundingBox{0, 0, 4, 4};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto s = generate_scenario(spec);
    s.video.validate();
    for (const auto& frame : s.video.frames)
      for (const auto& p : frame) {
        CHECK(p.box().x_min >= 0);
        CHECK(p.box().x_max <= spec.frame_width);
        CHECK(p.box().y_max <= spec.frame_height);
        for (double x : p.scores) CHECK(std::abs(x) <= 2.2);
      }
  }
}

TEST_CASE("spec validation") {
  auto spec = two_plants();
  spec.planted[0].t_end = 41;
  CHECK_THROWS_AS(generate_scenario(spec), ValidationError);
  spec = two_plants();
  spec.planted[0].margin = 0.0;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = two_plants();
  spec.planted[1].box_end = BoundingBox{300, 200, 400, 250};
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = two_plants();
  spec.planted[1].class_id = 4;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
  spec = two_plants();
  spec.score_noise = -1;
  CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("scenario spec parsing") {
  std::istringstream in(R"({"video_id":"s1","width":200,"height":100,"frame_count":30,
    "class_names":["run","jump"],
    "planted":[{"class":"jump","t_start":2,"t_end":20,"box_start":[0,0,10,10],"box_end":[50,50,60,60],"margin":1.5},
               {"class":1,"t_start":1,"t_end":30,"box_start":[100,0,150,40],"box_end":[100,0,150,40]}],
    "distractors_per_frame":3,"score_noise":0.1,"box_jitter":1,"seed":77})");
  const auto spec = read_scenario_spec(in, "spec.json");
  CHECK(spec.video_id == "s1");
  CHECK(spec.frame_width == 200);
  CHECK(spec.class_count == 2);
  REQUIRE(spec.planted.size() == 2);
  CHECK(spec.planted[0].class_id == 1);
  CHECK(spec.planted[0].margin == 1.5);
  CHECK(spec.planted[0].box_end == BoundingBox{50, 50, 60, 60});
  CHECK(spec.planted[1].class_id == 0);
  CHECK(spec.planted[1].margin == 1.0);
  CHECK(spec.seed == 77);
  CHECK(spec.box_jitter == 1);

  std::istringstream bad(R"({"frame_count":10,"class_count":2,"planted":[{"class":"nope","t_start":1,"t_end":2,
    "box_start":[0,0,1,1],"box_end":[0,0,1,1]}]})");
  CHECK_THROWS_WITH_AS(read_scenario_spec(bad, "bad.json"), doctest::Contains("bad.json"), ValidationError);
}

TEST_CASE("random helpers respect their bounds") {
  Xoshiro256 rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto v = random_video(rng, 5, 3, 2, 0.3);
    v.validate();
    for (const auto& f : v.frames) CHECK(f.size() <= 3);
    const auto p = random_path(rng, v, 1);
    CHECK(p.members.size() == 5);
    CHECK(p.class_id == 1);
    for (std::size_t t = 0; t < 5; ++t) CHECK(p.members[t].has_value() == !v.frames[t].empty());
  }
}

TEST_CASE("oracles refuse oversized searches") {
  Xoshiro256 rng(1);
  VideoProposals v = random_video(rng, 12, 4, 1);
  for (auto& f : v.frames)
    while (f.size() < 4) f.push_back(f[0]);
  // 4^12 > 10^6 combinations.
  CHECK_THROWS_AS(oracle_best_path(v, 0, 1.0), ValidationError);
  const auto four = random_video(rng, 12, 1, 4);
  CHECK_THROWS_AS(oracle_best_labels(random_path(rng, four, 0), four, 1.0), ValidationError);
}
