#include <doctest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/ingest.hpp"

using namespace tubelink;
using testing::proposal;

namespace {

FlowMagnitudeMap uniform_flow(int w, int h, double v) { return {w, h, 1, std::vector<double>(std::size_t(w * h), v)}; }

FlowMagnitudeMap random_flow(Xoshiro256& rng, int w, int h) {
  FlowMagnitudeMap f{w, h, 1, {}};
  for (int i = 0; i < w * h; ++i) f.magnitudes.push_back(rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 5.0));
  return f;
}

/// Independent per-pixel sum, no summed-area table.
double flow_inside(const FlowMagnitudeMap& f, const Region& r) {
  double s = 0.0;
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const bool in = r.mask ? r.mask->contains(x, y)
                             : (x >= r.box.x_min && x < r.box.x_max && y >= r.box.y_min && y < r.box.y_max);
      if (in) s += f.at(x, y);
    }
  }
  return s;
}

/// Greedy NMS written from the definition, over an explicit rank order.
std::vector<std::size_t> greedy_oracle(const std::vector<RegionProposal>& ps, ClassId c, double th) {
  std::vector<std::size_t> order(ps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Insertion sort keeps equal scores in input order.
  for (std::size_t i = 1; i < order.size(); ++i) {
    for (std::size_t j = i; j > 0 && ps[order[j]].scores[c] > ps[order[j - 1]].scores[c]; --j) {
      std::swap(order[j], order[j - 1]);
    }
  }
  std::vector<std::size_t> kept;
  for (auto i : order) {
    bool ok = true;
    for (auto k : kept) ok = ok && region_overlap(ps[i].region, ps[k].region) < th;
    if (ok) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<RegionProposal> random_frame(Xoshiro256& rng, int n) {
  std::vector<RegionProposal> ps;
  for (int i = 0; i < n; ++i) {
    const int x = rng.uniform_int(0, 14), y = rng.uniform_int(0, 14);
    ps.push_back(proposal(1, BoundingBox::make(x, y, x + rng.uniform_int(2, 6), y + rng.uniform_int(2, 6)),
                          {rng.uniform(-1, 1), rng.uniform(-1, 1)}));
  }
  return ps;
}

}  // namespace

TEST_CASE("actionness fixtures") {
  const auto flow = uniform_flow(4, 4, 1.0);
  CHECK(actionness(Region::from_box(BoundingBox::make(0, 0, 4, 4)), flow) == 1.0);
  CHECK(actionness(Region::from_box(BoundingBox::make(1, 1, 3, 3)), flow) == doctest::Approx(0.25));

  auto zero_inside = flow;
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) zero_inside.magnitudes[std::size_t(y * 4 + x)] = 0.0;
  CHECK(actionness(Region::from_box(BoundingBox::make(0, 0, 2, 2)), zero_inside) == 0.0);

  // No motion anywhere.
  CHECK(actionness(Region::from_box(BoundingBox::make(0, 0, 2, 2)), uniform_flow(4, 4, 0.0)) == 0.0);

  const auto mask = PixelMask::from_rle(4, 4, std::vector<std::int64_t>{0, 1, 15, 1});
  CHECK(actionness(Region::from_mask(mask), flow) == doctest::Approx(2.0 / 16.0));
}

TEST_CASE("actionness matches direct summation") {
  Xoshiro256 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto flow = random_flow(rng, 12, 9);
    const int x = rng.uniform_int(0, 10), y = rng.uniform_int(0, 7);
    const Region r = Region::from_box(BoundingBox::make(x, y, rng.uniform_int(x + 1, 12), rng.uniform_int(y + 1, 9)));
    const double total = flow_inside(flow, Region::from_box(BoundingBox::make(0, 0, 12, 9)));
    const double want = total > 0 ? flow_inside(flow, r) / total : 0.0;
    CHECK(actionness(r, flow) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("prune_by_actionness") {
  const auto flow = uniform_flow(4, 4, 1.0);
  std::vector<RegionProposal> ps = {proposal(1, BoundingBox::make(0, 0, 4, 4), {0.0}),
                                    proposal(1, BoundingBox::make(1, 1, 3, 3), {0.0}),
                                    proposal(1, BoundingBox::make(0, 0, 1, 1), {0.0})};
  CHECK(prune_by_actionness(ps, flow, 0.0).size() == 3);

  const auto kept = prune_by_actionness(ps, flow, 0.3);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].box() == ps[0].box());
  CHECK(kept[0].actionness == doctest::Approx(1.0));

  // Only a region holding all of the image motion reaches ratio 1.
  const auto all = prune_by_actionness(ps, flow, 1.0);
  REQUIRE(all.size() == 1);
  CHECK(all[0].box() == ps[0].box());

  const auto annotated = prune_by_actionness(ps, flow, 0.0);
  CHECK(annotated[1].actionness == doctest::Approx(0.25));
  CHECK(annotated[2].actionness == doctest::Approx(1.0 / 16.0));
  const auto masked = Region::from_mask(PixelMask::from_box(4, 4, BoundingBox::make(0, 0, 2, 2)));
  CHECK_THROWS_AS(actionness(masked, uniform_flow(5, 4, 1.0)), ValidationError);
}

TEST_CASE("prune_by_actionness is monotone in the threshold") {
  Xoshiro256 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto flow = random_flow(rng, 20, 20);
    const auto ps = random_frame(rng, 8);
    const double t1 = rng.uniform(0, 0.5), t2 = t1 + rng.uniform(0, 0.5);
    const auto lo = prune_by_actionness(ps, flow, t1);
    const auto hi = prune_by_actionness(ps, flow, t2);
    CHECK(hi.size() <= lo.size());
    for (const auto& p : hi) {
      CHECK(std::any_of(lo.begin(), lo.end(), [&](const RegionProposal& q) { return q.box() == p.box(); }));
    }
  }
}

TEST_CASE("nms fixtures") {
  std::vector<RegionProposal> one = {proposal(1, BoundingBox::make(0, 0, 5, 5), {1.0})};
  CHECK(nms(one, 0, 0.5).size() == 1);

  std::vector<RegionProposal> twins = {proposal(1, BoundingBox::make(0, 0, 5, 5), {1.0}),
                                       proposal(1, BoundingBox::make(0, 0, 5, 5), {2.0})};
  const auto kept = nms(twins, 0, 0.5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].scores[0] == 2.0);

  // Pairwise IoUs 0.6, 0.2, 0.2 via exact pixel sets on a 20x1 strip.
  auto masked = [](std::vector<std::int64_t> rle, double s) {
    RegionProposal p;
    p.region = Region::from_mask(PixelMask::from_rle(20, 1, rle));
    p.scores = {s};
    return p;
  };
  std::vector<RegionProposal> three = {masked({0, 8}, 0.9), masked({2, 8}, 0.8), masked({6, 2, 12, 2}, 0.7)};
  CHECK(region_overlap(three[0].region, three[1].region) == doctest::Approx(0.6));
  CHECK(region_overlap(three[0].region, three[2].region) == doctest::Approx(0.2));
  CHECK(region_overlap(three[1].region, three[2].region) == doctest::Approx(0.2));
  CHECK(nms_indices(three, 0, 0.5) == greedy_oracle(three, 0, 0.5));
  CHECK(nms_indices(three, 0, 0.5) == std::vector<std::size_t>{0, 2});
  CHECK(nms_indices(three, 0, 0.2) == std::vector<std::size_t>{0});
}

TEST_CASE("nms matches the greedy oracle, is an antichain and rank-invariant") {
  Xoshiro256 rng(13);
  for (int i = 0; i < 300; ++i) {
    const auto ps = random_frame(rng, rng.uniform_int(1, 10));
    const double th = rng.uniform(0.1, 0.9);
    const auto kept = nms_indices(ps, 1, th);
    CHECK(kept == greedy_oracle(ps, 1, th));
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b)
        CHECK(region_overlap(ps[kept[a]].region, ps[kept[b]].region) < th);

    auto scaled = ps;
    const double k = rng.uniform(0.1, 10), d = rng.uniform(-5, 5);
    for (auto& p : scaled) p.scores[1] = k * p.scores[1] + d;
    CHECK(nms_indices(scaled, 1, th) == kept);
  }
}

TEST_CASE("connected components") {
  CHECK(connected_components(BinarySegmentation{4, 4, 1, std::nullopt}).empty());

  const auto blob = PixelMask::from_box(6, 6, BoundingBox::make(1, 1, 4, 3));
  const auto one = connected_components({6, 6, 1, blob});
  REQUIRE(one.size() == 1);
  CHECK(one[0] == blob);

  // Diagonal contact joins under 8-connectivity.
  const auto diag = PixelMask::from_rle(4, 4, std::vector<std::int64_t>{0, 1, 5, 1});
  CHECK(connected_components({4, 4, 1, diag}).size() == 1);

  const auto apart = PixelMask::from_rle(5, 5, std::vector<std::int64_t>{0, 2, 3, 2, 20, 1});
  const auto three = connected_components({5, 5, 1, apart});
  REQUIRE(three.size() == 3);
  CHECK(three[0].runs().front().start == 0);
  CHECK(three[1].runs().front().start == 3);
  CHECK(three[2].runs().front().start == 20);
}

TEST_CASE("connected components partition the foreground") {
  Xoshiro256 rng(21);
  for (int i = 0; i < 100; ++i) {
    const int w = rng.uniform_int(1, 15), h = rng.uniform_int(1, 15);
    std::vector<std::uint8_t> bits(std::size_t(w * h));
    for (auto& b : bits) b = rng.uniform() < 0.35;
    const auto fg = PixelMask::from_bitmap(w, h, bits);
    const auto comps = connected_components({w, h, 1, fg});
    std::int64_t total = 0;
    for (std::size_t a = 0; a < comps.size(); ++a) {
      total += comps[a].pixel_count();
      for (std::size_t b = a + 1; b < comps.size(); ++b) CHECK(comps[a].intersection_count(comps[b]) == 0);
    }
    CHECK(total == (fg ? fg->pixel_count() : 0));
  }
}

TEST_CASE("powerset proposals") {
  const auto a = PixelMask::from_box(10, 10, BoundingBox::make(0, 0, 2, 2));
  const auto b = PixelMask::from_box(10, 10, BoundingBox::make(6, 5, 9, 9));
  const auto c = PixelMask::from_box(10, 10, BoundingBox::make(4, 0, 5, 1));

  CHECK(powerset_proposals(std::vector{a}, 1, 2).size() == 1);
  CHECK(powerset_proposals(std::vector{a, b, c}, 1, 2).size() == 7);

  const auto two = powerset_proposals(std::vector{a, b}, 3, 2);
  REQUIRE(two.size() == 3);
  CHECK(*two[0].region.mask == a);
  CHECK(*two[1].region.mask == b);
  CHECK(*two[2].region.mask == a.united(b));
  CHECK(two[2].box() == BoundingBox{0, 0, 9, 9});
  for (const auto& p : two) {
    CHECK(p.frame_index == 3);
    CHECK(p.scores == ScoreVector{0.0, 0.0});
  }
}

TEST_CASE("powerset cap keeps the largest components") {
  std::vector<PixelMask> comps;
  for (int i = 0; i < 5; ++i) comps.push_back(PixelMask::from_box(40, 4, BoundingBox::make(i * 8, 0, i * 8 + 1 + i, 1)));
  const auto ps = powerset_proposals(comps, 1, 1, 3);
  CHECK(ps.size() == 7);
  std::set<std::int64_t> seen;
  for (const auto& p : ps) seen.insert(p.region.mask->pixel_count());
  // Components 2, 3, 4 have 3, 4 and 5 pixels; unions range up to 12.
  CHECK(*seen.begin() == 3);
  CHECK(*seen.rbegin() == 12);

  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<PixelMask> sub(comps.begin(), comps.begin() + std::ptrdiff_t(std::min<std::size_t>(n, 5)));
    const std::size_t cap = 4;
    const std::size_t m = std::min(sub.size(), cap);
    CHECK(powerset_proposals(sub, 1, 1, cap).size() == (std::size_t{1} << m) - 1);
  }
}
