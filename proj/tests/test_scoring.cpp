#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/scoring.hpp"

using namespace tubelink;
using testing::proposal;

namespace {

double norm(const FeatureVector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

LinearModel model(std::vector<std::vector<double>> w, std::vector<double> b) {
  LinearModel m;
  m.feature_dim = w.empty() ? 0 : w[0].size();
  m.weights = std::move(w);
  m.biases = std::move(b);
  return m;
}

}  // namespace

TEST_CASE("l2_normalize") {
  const std::vector<double> unit = {0.0, 1.0, 0.0};
  CHECK(l2_normalize(unit) == unit);
  const std::vector<double> zero = {0.0, 0.0};
  CHECK(l2_normalize(zero) == zero);
  const auto v = l2_normalize(std::vector<double>{3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));

  Xoshiro256 rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(std::size_t(rng.uniform_int(1, 8)));
    for (auto& e : x) e = rng.uniform(-100, 100);
    CHECK(norm(l2_normalize(x)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("fuse_features") {
  const std::vector<double> a = {1.0, 0.0}, f = {0.0, 1.0};
  CHECK(fuse_features(a, f) == std::vector<double>{1.0, 0.0, 0.0, 1.0});
  const auto no_flow = fuse_features(std::vector<double>{3.0, 4.0}, std::vector<double>{5.0, 5.0}, 1.0, 0.0);
  CHECK(no_flow[2] == 0.0);
  CHECK(no_flow[3] == 0.0);

  const auto x = fuse_features(std::vector<double>{3.0, 4.0}, std::vector<double>{0.0, -2.0}, 1.0, 2.0);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == doctest::Approx(0.6));
  CHECK(x[1] == doctest::Approx(0.8));
  CHECK(x[2] == 0.0);
  CHECK(x[3] == doctest::Approx(-2.0));
}

TEST_CASE("linear_score") {
  const auto constant = model({{0, 0, 0}, {0, 0, 0}}, {1.5, -2.0});
  CHECK(linear_score(std::vector<double>{7, 8, 9}, constant) == ScoreVector{1.5, -2.0});

  const auto projection = model({{1, 0, 0}}, {0});
  CHECK(linear_score(std::vector<double>{4.25, 8, 9}, projection) == ScoreVector{4.25});

  CHECK_THROWS_AS(linear_score(std::vector<double>{1, 2}, projection), ValidationError);

  Xoshiro256 rng(2);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::vector<double>> w(3, std::vector<double>(4));
    std::vector<double> b(3), x(4);
    for (auto& row : w)
      for (auto& e : row) e = rng.uniform(-1, 1);
    for (auto& e : b) e = rng.uniform(-1, 1);
    for (auto& e : x) e = rng.uniform(-1, 1);
    const auto m = model(w, b);
    const auto s = linear_score(x, m);
    for (std::size_t c = 0; c < 3; ++c) {
      const double dot = x[0] * w[c][0] + x[1] * w[c][1] + x[2] * w[c][2] + x[3] * w[c][3] + b[c];
      CHECK(s[c] == doctest::Approx(dot).epsilon(1e-12));
    }

    // Affine in the input with zero bias; shifts exactly with the bias.
    const auto m0 = model(w, {0, 0, 0});
    const double k = rng.uniform(-3, 3);
    std::vector<double> kx = x;
    for (auto& e : kx) e *= k;
    const auto s0 = linear_score(x, m0);
    const auto sk = linear_score(kx, m0);
    for (std::size_t c = 0; c < 3; ++c) CHECK(sk[c] == doctest::Approx(k * s0[c]).epsilon(1e-12));
    auto shifted = m;
    for (auto& e : shifted.biases) e += 0.5;
    const auto ss = linear_score(x, shifted);
    for (std::size_t c = 0; c < 3; ++c) CHECK(ss[c] - s[c] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("linear model parsing") {
  std::istringstream good(R"({"class_names":["a","b"],"feature_dim":2,"weights":[[1,2],[3,4]],"biases":[0,1]})");
  const auto m = read_linear_model(good, "model.json");
  CHECK(m.class_count() == 2);
  std::istringstream bad(R"({"class_names":["a"],"feature_dim":2,"weights":[[1]],"biases":[0]})");
  CHECK_THROWS_WITH_AS(read_linear_model(bad, "model.json"), doctest::Contains("model.json"), ValidationError);
}

TEST_CASE("score_video fills scores from fused features") {
  auto v = testing::video_of({{{BoundingBox{0, 0, 2, 2}, {}}, {BoundingBox{1, 1, 3, 3}, {}}}, {{BoundingBox{0, 0, 1, 1}, {}}}},
                             0, 10, 10);
  std::istringstream feats(
      R"({"video_id":"v","frame":1,"proposal_index":0,"x_a":[3,4],"x_f":[1]})"
      "\n"
      R"({"video_id":"v","frame":1,"proposal_index":1,"x_a":[0,0],"x_f":[-2]})"
      "\n"
      R"({"video_id":"v","frame":2,"proposal_index":0,"x_a":[1,0],"x_f":[0]})");
  const auto features = read_features(feats, "feats");
  auto m = model({{1, 1, 1}, {0, 0, 0}}, {0.0, 0.25});
  m.class_names = {"x", "y"};
  score_video(v, features, m);
  CHECK(v.class_names == std::vector<std::string>{"x", "y"});
  CHECK(v.frames[0][0].scores[0] == doctest::Approx(0.6 + 0.8 + 1.0));
  CHECK(v.frames[0][1].scores[0] == doctest::Approx(-1.0));
  CHECK(v.frames[1][0].scores == ScoreVector{1.0, 0.25});
  v.validate();

  // One record short.
  auto missing = features;
  missing.erase(FeatureKey{"v", 2, 0});
  CHECK_THROWS_AS(score_video(v, missing, m), ValidationError);
  // One record too many.
  auto extra = features;
  extra[FeatureKey{"v", 2, 5}] = ProposalFeatures{"v", 2, 5, {1, 0}, {0}};
  CHECK_THROWS_AS(score_video(v, extra, m), ValidationError);
  // Dimension mismatch.
  auto wrong = model({{1, 1}}, {0});
  CHECK_THROWS_AS(score_video(v, features, wrong), ValidationError);

  std::istringstream dup(R"({"video_id":"v","frame":1,"proposal_index":0,"x_a":[1],"x_f":[1]})"
                         "\n"
                         R"({"video_id":"v","frame":1,"proposal_index":0,"x_a":[1],"x_f":[1]})");
  CHECK_THROWS_AS(read_features(dup, "feats"), ValidationError);
}

TEST_CASE("partition_examples buckets by best overlap") {
  const std::vector<AnnotatedExtent> gt = {{2, Region::from_box(BoundingBox::make(0, 0, 10, 10))}};
  // IoU 0.8, 0.2 and 0.5 against the annotated extent.
  const std::vector<RegionProposal> ps = {proposal(1, BoundingBox::make(0, 0, 10, 8), {}),
                                          proposal(1, BoundingBox::make(0, 0, 10, 2), {}),
                                          proposal(1, BoundingBox::make(0, 0, 10, 5), {})};
  CHECK(box_iou(ps[0].box(), gt[0].region.box) == doctest::Approx(0.8));
  const auto part = partition_examples(ps, gt);
  REQUIRE(part.positives.size() == 2);
  CHECK_FALSE(part.positives[0].proposal_index.has_value());
  CHECK(part.positives[1].proposal_index == std::optional<std::size_t>(0));
  CHECK(part.positives[1].class_id == 2);
  CHECK(part.negatives == std::vector<std::size_t>{1});
  CHECK(part.ignored == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(partition_examples(ps, gt, 0.3, 0.3), ValidationError);
}

TEST_CASE("partition buckets are disjoint and cover the input") {
  Xoshiro256 rng(4);
  for (int i = 0; i < 200; ++i) {
    auto v = random_video(rng, 1, 10, 1);
    std::vector<AnnotatedExtent> gt;
    for (int g = rng.uniform_int(0, 3); g > 0; --g) {
      const int x = rng.uniform_int(0, 18), y = rng.uniform_int(0, 18);
      gt.push_back({ClassId(g), Region::from_box(BoundingBox::make(x, y, x + 6, y + 6))});
    }
    const auto& ps = v.frames[0];
    const auto part = partition_examples(ps, gt);
    std::vector<int> hits(ps.size(), 0);
    std::size_t gt_positives = 0;
    for (const auto& p : part.positives) {
      if (p.proposal_index) ++hits[*p.proposal_index];
      else ++gt_positives;
    }
    for (auto n : part.negatives) ++hits[n];
    for (auto n : part.ignored) ++hits[n];
    CHECK(gt_positives == gt.size());
    for (int h : hits) CHECK(h == 1);
  }
}
