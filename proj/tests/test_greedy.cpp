#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pdsketch/greedy.hpp"
#include "pdsketch/oracle.hpp"
#include "pdsketch/sketch.hpp"
#include "support.hpp"

using namespace pdsketch;

namespace {

// min over a dense grid of t in [lo, hi] of |(t,t) - y|.
Length grid_seg_dist(double lo, double hi, const Point& y) {
  Length best = kInfinity;
  for (int k = 0; k <= 40000; ++k) {
    const double t = lo + (hi - lo) * k / 40000.0;
    best = std::min(best, linf_dist({t, t}, y));
  }
  return best;
}

Diagram three_point() { return parse_diagram("0 10\n4 6\n9 10\n").diagram; }

}  // namespace

TEST_CASE("segment distance") {
  CHECK(d_seg({5, -kInfinity, 5}, {6, 8}) == 3);
  CHECK(grid_seg_dist(-95, 5, {6, 8}) == doctest::Approx(3).epsilon(1e-9));
  CHECK(d_seg({5, 5, kInfinity}, {6, 8}) == 1);
  CHECK(grid_seg_dist(5, 105, {6, 8}) == doctest::Approx(1).epsilon(1e-9));
  CHECK(d_seg({}, {0, 10}) == 5);
}

TEST_CASE("projection distance and edge pruning") {
  CHECK(proj_distance(std::nullopt, {0, 10}) == 5);
  CHECK(proj_distance(Point{0, 10}, {4, 6}) == 4);
  CHECK(proj_distance(std::nullopt, {9, 10}) == 0.5);
  CHECK(keep_edge(1, 2, 8));
  CHECK_FALSE(keep_edge(1, 2, 8.5));
  CHECK(keep_edge(0, 0, 0));
}

TEST_CASE("diagonal partition") {
  DiagonalPartition part;
  CHECK(part.insert(2));
  CHECK(part.insert(10));
  CHECK_FALSE(part.insert(2));
  const Segment s = part.segment_at(2);
  CHECK(s.lo == -kInfinity);
  CHECK(s.hi == 6);
  CHECK(part.segment_at(10).lo == 6);
  CHECK(part.segment_containing(6).center_t == 2);
  CHECK(part.segment_containing(6.5).center_t == 10);
  CHECK(part.segments().size() == 2);
}

TEST_CASE("three point example") {
  const auto g = build_sketch(three_point());
  CHECK(g.order == std::vector<Point>{{0, 10}, {4, 6}, {9, 10}});
  CHECK(g.radii == std::vector<Length>{5, 1, 0.5, 0});
  REQUIRE(g.plans.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.plans[i].target == i);
    CHECK(g.plans[i].moves == std::vector<PlanMove>{{kDiagonal, 1}});
  }
}

TEST_CASE("two point example moves mass off the first point") {
  const auto g = build_sketch(parse_diagram("0 10\n1 10\n").diagram);
  CHECK(g.order == std::vector<Point>{{0, 10}, {1, 10}});
  CHECK(g.radii == std::vector<Length>{5, 1, 0});
  CHECK(g.plans[0].moves == std::vector<PlanMove>{{kDiagonal, 2}});
  CHECK(g.plans[1].moves == std::vector<PlanMove>{{0, 1}});
}

TEST_CASE("empty diagram") {
  const auto g = build_sketch(Diagram{});
  CHECK(g.order.empty());
  CHECK(g.radii == std::vector<Length>{0});
  CHECK(brute_greedy(Diagram{}) == g);
}

TEST_CASE("single point") {
  const auto d = parse_diagram("1 4\n").diagram;
  const auto g = build_sketch(d);
  CHECK(g.radii == std::vector<Length>{1.5, 0});
  CHECK(g == brute_greedy(d));
}

TEST_CASE("cell structure matches brute force at every step") {
  support::Rng rng(21);
  BuildOptions opt;
  opt.verify = true;
  for (int trial = 0; trial < 150; ++trial) {
    const Diagram d = trial % 2 ? support::tie_diagram(rng, 24) : support::random_diagram(rng, 24);
    BuildStats stats;
    const auto g = build_sketch(d, opt, &stats);
    CHECK(g == brute_greedy(d));
  }
}

TEST_CASE("single-point diagonal gives the same sketch") {
  support::Rng rng(22);
  BuildOptions naive;
  naive.diagonal = DiagonalMode::single_point;
  naive.verify = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Diagram d = support::tie_diagram(rng, 20);
    BuildStats stats;
    CHECK(build_sketch(d, naive, &stats) == build_sketch(d));
    CHECK(stats.projections_inserted == 0);
  }
}

TEST_CASE("insertion radii are the Hausdorff errors of the prefixes") {
  support::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Diagram d = support::random_diagram(rng, 32);
    const auto g = build_sketch(d);
    for (std::size_t i = 0; i <= g.order.size(); ++i) {
      PointSet prefix{{g.order.begin(), g.order.begin() + static_cast<std::ptrdiff_t>(i)}, true};
      CHECK(g.radii[i] == brute_hausdorff(prefix, flat(d)));
    }
  }
}

TEST_CASE("partial sketches are prefixes of the full sketch") {
  support::Rng rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const Diagram d = support::random_diagram(rng, 30);
    const auto full = build_sketch(d);
    const std::size_t k = support::below(rng, d.size() + 1);
    const auto part = build_sketch(d, StopRule::max_points(k));
    REQUIRE(part.order.size() == k);
    CHECK(std::equal(part.order.begin(), part.order.end(), full.order.begin()));
    CHECK(std::equal(part.radii.begin(), part.radii.end(), full.radii.begin()));
    CHECK(std::equal(part.plans.begin(), part.plans.end(), full.plans.begin()));

    const Length eps = full.radii[k];
    const auto prec = build_sketch(d, StopRule::precision(eps));
    CHECK(prec.radii.back() <= eps);
    const std::size_t want = Sketch(full).min_index_for_error(eps);
    CHECK(prec.order.size() == want);
  }
}

TEST_CASE("plans have at most 25 sources") {
  support::Rng rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = build_sketch(support::random_diagram(rng, 200, 0, 0.125, 64));
    for (const auto& p : g.plans) CHECK(p.moves.size() <= 25);
  }
}

TEST_CASE("touch counts") {
  BuildStats one;
  build_sketch(parse_diagram("0 2\n").diagram, {}, &one);
  CHECK(one.touches >= 1);
  CHECK(one.touches <= 4);

  // Points hugging the diagonal: the naive variant rescans everything.
  auto collinear = [](std::size_t n) {
    std::vector<DiagramEntry> raw;
    for (std::size_t k = 1; k <= n; ++k) raw.push_back({{2.0 * k - 1, 2.0 * k + 1}, 1});
    return Diagram::normalized(raw);
  };
  BuildOptions naive;
  naive.diagonal = DiagonalMode::single_point;
  BuildStats a, b, c, e;
  build_sketch(collinear(256), naive, &a);
  build_sketch(collinear(512), naive, &b);
  build_sketch(collinear(256), {}, &c);
  build_sketch(collinear(512), {}, &e);
  CHECK(static_cast<double>(b.touches) / static_cast<double>(a.touches) > 3.5);
  CHECK(static_cast<double>(e.touches) / static_cast<double>(c.touches) < 2.6);
}
