#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pdsketch/errors.hpp"
#include "pdsketch/matching.hpp"
#include "pdsketch/neighbor_graphs.hpp"
#include "pdsketch/oracle.hpp"
#include "pdsketch/sketch.hpp"
#include "support.hpp"

using namespace pdsketch;

namespace {

Diagram dg(const char* text) { return parse_diagram(text).diagram; }

std::vector<FilteredGraph::Edge> scan_edges(std::span<const Point> order,
                                            std::span<const Length> radii, double gamma) {
  std::vector<FilteredGraph::Edge> out;
  for (Index j = 0; j < order.size(); ++j) {
    for (Index i = 0; i < j; ++i) {
      const Length d = linf_dist(order[i], order[j]);
      if (d <= gamma * radii[j]) out.push_back({j, i, d});
    }
  }
  return out;
}

bool same(const std::vector<FilteredGraph::Edge>& a, const std::vector<FilteredGraph::Edge>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].later != b[k].later || a[k].earlier != b[k].earlier || a[k].length != b[k].length) {
      return false;
    }
  }
  return true;
}

std::vector<Point> prefix(const Sketch& s, std::size_t n) {
  return {s.order().begin(), s.order().begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

TEST_CASE("filtered graph example") {
  const Sketch s = Sketch::build(dg("0 10\n4 6\n9 10\n"));
  // Radii 5, 1, 0.5: (4,6) reaches (0,10) at 4 <= 4 * 1.
  const FilteredGraph g = filtered_graph(s, 4);
  const auto e = g.edges();
  REQUIRE(e.size() == 1);
  CHECK(e[0].later == 1);
  CHECK(e[0].earlier == 0);
  CHECK(e[0].length == 4);
  CHECK(g.back_degree(2) == 0);
  CHECK(filtered_graph(s, 3.9).edges().empty());
  std::ostringstream out;
  write_graph(out, g);
  CHECK(out.str() == "edge 1 0 4\n");

  CHECK_THROWS_AS(filtered_graph(s, 1), ValidationError);
  const std::vector<Point> pts{{0, 10}, {4, 6}};
  const std::vector<Length> up{1, 2, 0};
  CHECK_THROWS_AS(filtered_graph(pts, up, 2), ValidationError);
}

TEST_CASE("filtered graph matches a quadratic scan") {
  support::Rng rng(61);
  for (int trial = 0; trial < 120; ++trial) {
    const Diagram d = trial % 3 ? support::random_diagram(rng, 150)
                                : support::random_diagram(rng, 150, 0, 0.125, 2000);
    const Sketch s = Sketch::build(d);
    for (double gamma : {1.5, 2.0, 4.0, 9.0}) {
      const FilteredGraph g = filtered_graph(s, gamma);
      CHECK(same(g.edges(), scan_edges(s.order(), s.radii(), gamma)));
      const double bound = (2 * gamma + 1) * (2 * gamma + 1);
      CHECK(static_cast<double>(g.max_back_degree()) <= bound);
      std::size_t deg = 0;
      for (Index v = 0; v < g.size(); ++v) deg += g.neighbors(v).size();
      CHECK(deg == 2 * g.edges().size());
    }
  }
}

TEST_CASE("bipartite graph is complete at its scale") {
  support::Rng rng(62);
  for (int trial = 0; trial < 150; ++trial) {
    const Diagram a = support::random_diagram(rng, 60);
    const Diagram b = support::random_diagram(rng, 60);
    const Sketch sa = Sketch::build(a), sb = Sketch::build(b);
    const double gamma = trial % 2 ? 2.0 : 4.0;
    const BiGraph g = bipartite_graph(sa, sb, gamma, trial % 3 == 0);

    const auto pa = prefix(sa, g.left_count), pb = prefix(sb, g.right_count);
    CandidateEdges want;
    for (Index u = 0; u < pa.size(); ++u) {
      for (Index w = 0; w < pb.size(); ++w) {
        if (linf_dist(pa[u], pb[w]) <= gamma * g.scale) want.push_back({u, w});
      }
    }
    CHECK(g.edges == want);

    // Nearest cross neighbor within reach, else at least reach away.
    for (Index u = 0; u < pa.size(); ++u) {
      Length best = diag_dist(pa[u]);
      for (const auto& q : pb) best = std::min(best, linf_dist(pa[u], q));
      if (best <= gamma * g.scale) CHECK(g.left_nn[u] == best);
      CHECK(g.left_nn[u] >= best);
    }

    for (const auto& lv : g.levels) {
      std::size_t na = 0, nb = 0;
      while (na < sa.size() && sa.radii()[na] >= lv.scale) ++na;
      while (nb < sb.size() && sb.radii()[nb] >= lv.scale) ++nb;
      CHECK(lv.hausdorff ==
            brute_hausdorff({prefix(sa, na), true}, {prefix(sb, nb), true}));
    }
  }
}

TEST_CASE("an isolated vertex bounds the distance from below") {
  support::Rng rng(63);
  int isolations = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Diagram a = support::random_diagram(rng, 40);
    const Diagram b = support::random_diagram(rng, 40);
    const Sketch sa = Sketch::build(a), sb = Sketch::build(b);
    for (double gamma : {2.0, 4.0}) {
      const BiGraph g = bipartite_graph(sa, sb, gamma, true);
      if (!g.isolation_scale) continue;
      ++isolations;
      const Length lambda = *g.isolation_scale;
      CHECK(brute_hausdorff(flat(a), flat(b)) >= (gamma - 1) * lambda);
    }
  }
  CHECK(isolations > 100);
}

TEST_CASE("hausdorff approximation") {
  const Sketch a = Sketch::build(dg("0 10\n"));
  const Sketch b = Sketch::build(dg("0 8\n"));
  const auto h = approx_hausdorff(a, b, 4);
  CHECK(h.lower <= 2);
  CHECK(h.upper >= 2);
  CHECK(h.estimate * 3 / 4 <= 2);
  CHECK(h.estimate * 5 / 4 >= 2);

  support::Rng rng(64);
  for (int trial = 0; trial < 300; ++trial) {
    const Diagram da = support::random_diagram(rng, 50);
    const Diagram db = trial % 4 ? support::random_diagram(rng, 50) : da;
    const Length truth = brute_hausdorff(flat(da), flat(db));
    for (double gamma : {1.5, 2.0, 4.0}) {
      const auto est = approx_hausdorff(Sketch::build(da), Sketch::build(db), gamma);
      CHECK(est.lower <= truth);
      CHECK(truth <= est.upper);
      CHECK(est.estimate * (gamma - 1) / gamma <= truth * (1 + 1e-12));
      CHECK(truth <= est.estimate * (gamma + 1) / gamma * (1 + 1e-12));
    }
    // Partial sketches: the interval still holds the full distance.
    const Sketch pa = Sketch::build(da, StopRule::max_points(da.size() / 2));
    const Sketch pb = Sketch::build(db, StopRule::max_points(db.size() / 3));
    const auto est = approx_hausdorff(pa, pb, 2);
    CHECK(est.lower <= truth);
    CHECK(truth <= est.upper);
  }
}

TEST_CASE("exact hausdorff") {
  support::Rng rng(65);
  for (int trial = 0; trial < 200; ++trial) {
    const Diagram a = support::random_diagram(rng, 40);
    const Diagram b = support::random_diagram(rng, 40);
    const auto fa = flat(a), fb = flat(b);
    CHECK(exact_hausdorff(fa.points, fb.points) == brute_hausdorff(fa, fb));
  }
}

TEST_CASE("bottleneck approximation") {
  const Sketch a = Sketch::build(dg("0 10\n"));
  const Sketch b = Sketch::build(dg("0 8\n"));
  const auto r = approx_bottleneck(a, b, 0, 4);
  CHECK(r.value == 2);
  CHECK(r.eps_used == 0);
  CHECK(approx_bottleneck(Sketch{}, Sketch{}, 1, 2).value == 0);
  CHECK_THROWS_AS(approx_bottleneck(Sketch::build(dg("0 10\n4 6\n"), StopRule::max_points(1)), b,
                                    0.5, 2),
                  PrecisionUnreachable);

  support::Rng rng(66);
  for (int trial = 0; trial < 200; ++trial) {
    const Diagram da = support::random_diagram(rng, 40);
    const Diagram db = support::random_diagram(rng, 40);
    const Sketch sa = Sketch::build(da), sb = Sketch::build(db);
    const Length truth = exact_bottleneck(da, db).value;
    const Length eps = std::vector<Length>{0, 0.5, 2, 8}[trial % 4];
    const auto res = approx_bottleneck(sa, sb, eps, trial % 2 ? 2.0 : 4.0);
    CHECK(res.eps_used <= eps);
    CHECK(std::abs(res.value - truth) <= res.eps_used);
    const Diagram pa = sa.reconstruct(res.left_index), pb = sb.reconstruct(res.right_index);
    CHECK(cost_bottleneck(res.transport, pa, pb) == res.value);
    CHECK(res.value == exact_bottleneck(pa, pb).value);
  }
}
