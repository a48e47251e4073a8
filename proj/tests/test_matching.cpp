#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "pdsketch/errors.hpp"
#include "pdsketch/matching.hpp"
#include "pdsketch/oracle.hpp"
#include "pdsketch/sketch.hpp"
#include "support.hpp"

using namespace pdsketch;

namespace {

Diagram dg(const char* text) { return parse_diagram(text).diagram; }

// Natural transport from X to the last prefix of its own sketch: every unit
// sits on its nearest greedy point or on the diagonal.
Transport natural_transport(const Diagram& x, const Sketch& s, std::size_t i) {
  Transport t;
  const auto order = s.order();
  for (std::size_t r = 0; r < x.size(); ++r) {
    Length best = diag_dist(x.point(r));
    Index owner = kDiagonal;
    for (std::size_t c = 0; c < i; ++c) {
      const Length d = linf_dist(x.point(r), order[c]);
      if (d < best) {
        best = d;
        owner = c;
      }
    }
    t.add(r, owner, x.mult(r));
  }
  return t;
}

// Every way of moving the planned units into the new point without touching
// anything else. Diagonal-sourced units come from rows matched to the
// diagonal or from X's own diagonal.
std::vector<Transport> all_reroutings(const Transport& m, const TransportationPlan& plan) {
  std::vector<Transport> out;
  const Index target = plan.target;
  std::function<void(std::size_t, Transport)> go = [&](std::size_t k, Transport cur) {
    if (k == plan.moves.size()) {
      out.push_back(std::move(cur));
      return;
    }
    const Index q = plan.moves[k].source;
    const Mass need = plan.moves[k].mass;
    std::vector<std::pair<Index, Mass>> rows;
    if (const auto* col = m.column(q)) rows.assign(col->begin(), col->end());
    std::function<void(std::size_t, Mass, Transport)> pick = [&](std::size_t r, Mass left,
                                                                  Transport t) {
      if (r == rows.size()) {
        if (left == 0) {
          go(k + 1, std::move(t));
        } else if (q == kDiagonal) {
          t.add(kDiagonal, target, left);
          go(k + 1, std::move(t));
        }
        return;
      }
      for (Mass u = 0; u <= std::min(left, rows[r].second); ++u) {
        Transport t2 = t;
        if (u > 0) {
          const Mass had = t2.remove(rows[r].first, q);
          if (had > u) t2.add(rows[r].first, q, had - u);
          t2.add(rows[r].first, target, u);
        }
        pick(r + 1, left - u, std::move(t2));
      }
    };
    pick(0, need, std::move(cur));
  };
  go(0, m);
  return out;
}

// Entries outside the plan's source columns are left alone.
void check_local(const Transport& before, const Transport& after, const TransportationPlan& plan,
                 bool strict_rows) {
  for (const auto& e : before.entries()) {
    bool source = false;
    for (const auto& mv : plan.moves) source = source || mv.source == e.b;
    if (!source) CHECK(after.at(e.a, e.b) == e.mass);
    if (strict_rows && source) CHECK(after.at(e.a, e.b) <= e.mass);
  }
}

}  // namespace

TEST_CASE("transport costs") {
  const Diagram a = dg("0 10\n4 6\n");
  const Diagram b = dg("0 8\n");
  Transport t;
  t.add(0, 0, 1);
  t.add(1, kDiagonal, 1);
  CHECK(cost_bottleneck(t, a, b) == 2);
  CHECK(cost_wasserstein(t, a, b, 1) == 3);
  CHECK(cost_wasserstein(t, a, b, 2) == doctest::Approx(std::sqrt(5.0)));

  Transport d;
  d.add(0, kDiagonal, 1);
  CHECK(cost_bottleneck(d, dg("0 10\n"), Diagram{}) == 5);
  CHECK(cost_bottleneck(Transport{}, Diagram{}, Diagram{}) == 0);
  CHECK(cost_wasserstein(Transport{}, Diagram{}, Diagram{}, 3) == 0);

  Transport bad;
  bad.add(0, 0, 2);
  CHECK_THROWS_AS(cost_bottleneck(bad, dg("0 10\n"), dg("0 8\n")), ValidationError);
  CHECK_THROWS_AS(cost_wasserstein(t, a, b, 0.5), ValidationError);
}

TEST_CASE("exact bottleneck examples") {
  CHECK(exact_bottleneck(dg("0 10\n"), dg("0 8\n")).value == 2);
  CHECK(exact_bottleneck(dg("0 2\n"), dg("10 12\n")).value == 1);
  CHECK(exact_bottleneck(dg("0 10 2\n"), dg("0 10\n")).value == 5);
  CHECK(brute_hausdorff(flat(dg("0 10 2\n")), flat(dg("0 10\n"))) == 0);
  CHECK(exact_bottleneck(Diagram{}, Diagram{}).value == 0);
  CHECK(exact_bottleneck(dg("0 4\n"), Diagram{}).value == 2);
}

TEST_CASE("exact bottleneck agrees with the brute-force oracle") {
  support::Rng rng(41);
  for (int trial = 0; trial < 400; ++trial) {
    const Diagram a = trial % 2 ? support::tie_diagram(rng, 8, 6) : support::random_diagram(rng, 8, 6);
    const Diagram b = trial % 2 ? support::tie_diagram(rng, 8, 6) : support::random_diagram(rng, 8, 6);
    const auto res = exact_bottleneck(a, b);
    CHECK(res.value == brute_bottleneck(a, b));
    CHECK(cost_bottleneck(res.transport, a, b) == res.value);
  }
}

TEST_CASE("a candidate graph holding every short edge gives the same value") {
  support::Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Diagram a = support::random_diagram(rng, 10, 12);
    const Diagram b = support::random_diagram(rng, 10, 12);
    const Length v = exact_bottleneck(a, b).value;
    CandidateEdges g;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (linf_dist(a.point(i), b.point(j)) <= v) g.push_back({i, j});
      }
    }
    const auto res = exact_bottleneck(a, b, &g);
    CHECK(res.value == v);
    for (const auto& e : res.transport.entries()) {
      if (e.a != kDiagonal && e.b != kDiagonal) {
        CHECK(std::find(g.begin(), g.end(), std::pair<Index, Index>{e.a, e.b}) != g.end());
      }
    }
  }
  CandidateEdges out_of_range{{3, 0}};
  CHECK_THROWS_AS(exact_bottleneck(dg("0 1\n"), dg("0 1\n"), &out_of_range), ValidationError);
}

TEST_CASE("naive update example") {
  const Diagram x = dg("1 10\n");
  const Sketch s = Sketch::build(dg("0 10\n1 10\n"));
  Transport m;
  m.add(0, 0, 1);
  m.add(kDiagonal, 0, 1);
  const auto& plan = s.plans()[1];
  const Transport out = naive_update(m, plan, x, s.reconstruct(1), s.reconstruct(2));
  CHECK(cost_bottleneck(m, x, s.reconstruct(1)) == 5);
  CHECK(out.entries() == std::vector<Transport::Entry>{{0, 1, 1}, {kDiagonal, 0, 1}});
  CHECK(cost_bottleneck(out, x, s.reconstruct(2)) == 5);
}

TEST_CASE("diagonal-only plans touch only diagonal mass") {
  const Diagram d = dg("0 10\n4 6\n9 10\n");
  const Sketch s = Sketch::build(d);
  const Transport m = natural_transport(d, s, 1);
  const Transport out = naive_update(m, s.plans()[1], d, s.reconstruct(1), s.reconstruct(2));
  check_local(m, out, s.plans()[1], true);
  CHECK(out.at(kDiagonal, 1) == 1);
}

TEST_CASE("local bottleneck update example") {
  const Diagram x = dg("0 9\n1 10\n");
  const Sketch s = Sketch::build(dg("0 10\n1 10\n"));
  REQUIRE(s.order()[0] == Point{0, 10});
  Transport m;
  m.add(0, 0, 1);
  m.add(1, 0, 1);
  UpdateStats stats;
  const Transport out =
      local_update_bottleneck(m, s.plans()[1], x, s.reconstruct(1), s.reconstruct(2), &stats);
  validate(out, x, s.reconstruct(2));
  CHECK(out.at(0, 1) + out.at(1, 1) == 1);
  CHECK(cost_bottleneck(out, x, s.reconstruct(2)) == 1);
  CHECK(stats.steps == 1);
  CHECK(stats.candidate_edges >= 4);
}

TEST_CASE("local bottleneck update beats every rerouting") {
  support::Rng rng(43);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Diagram d = support::tie_diagram(rng, 5, 8);
    const Diagram x = support::tie_diagram(rng, 5, 8);
    const Sketch s = Sketch::build(d);
    Transport m = exact_bottleneck(x, s.reconstruct(0)).transport;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Diagram before = s.reconstruct(i);
      const Diagram after = s.reconstruct(i + 1);
      const auto& plan = s.plans()[i];
      const Transport local = local_update_bottleneck(m, plan, x, before, after);
      const Transport naive = naive_update(m, plan, x, before, after);
      validate(local, x, after);
      check_local(m, naive, plan, true);
      check_local(m, local, plan, false);
      const Length cl = cost_bottleneck(local, x, after);
      for (const auto& t : all_reroutings(m, plan)) {
        validate(t, x, after);
        CHECK(cl <= cost_bottleneck(t, x, after));
        ++checked;
      }
      const Length step = exact_bottleneck(before, after).value;
      CHECK(cost_bottleneck(naive, x, after) <= cost_bottleneck(m, x, before) + s.error_at(i) +
                                                     s.error_at(i + 1) + step);
      m = local;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("local update may reroute diagonal mass") {
  const Diagram x = dg("1 10\n");
  const Sketch s = Sketch::build(dg("0 10\n1 10\n"));
  Transport m;
  m.add(0, 0, 1);
  m.add(kDiagonal, 0, 1);
  const auto& plan = s.plans()[1];
  const Diagram before = s.reconstruct(1), after = s.reconstruct(2);
  const Transport local = local_update_bottleneck(m, plan, x, before, after);
  CHECK(local.entries() == std::vector<Transport::Entry>{{0, 0, 1}, {kDiagonal, 1, 1}});
  CHECK(cost_bottleneck(local, x, after) == 4.5);
  CHECK(cost_bottleneck(naive_update(m, plan, x, before, after), x, after) == 5);
}

TEST_CASE("wasserstein update moves the cheapest units") {
  // Both X points sit on q = (0,10); one unit must go to p = (0,6).
  // For (0,4): delta = 2 - 6 < 0. For (0,12): delta = 6 - 2 > 0.
  const Diagram x = dg("0 4\n0 12\n");
  const Diagram before = Diagram::from_ordered({{{0, 10}, 2}});
  const Diagram after = Diagram::from_ordered({{{0, 10}, 1}, {{0, 6}, 1}});
  TransportationPlan plan{1, {{0, 1}}};
  Transport m;
  m.add(0, 0, 1);
  m.add(1, 0, 1);
  const Transport out = local_update_wasserstein(m, plan, x, before, after, 1);
  CHECK(out.at(0, 1) == 1);
  CHECK(out.at(1, 0) == 1);
  CHECK(cost_wasserstein(out, x, after, 1) < cost_wasserstein(m, x, before, 1));
}

TEST_CASE("wasserstein update is consistent with the plan") {
  support::Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const Diagram d = support::random_diagram(rng, 8, 10);
    const Diagram x = support::random_diagram(rng, 8, 10);
    const Sketch s = Sketch::build(d);
    Transport m = exact_bottleneck(x, Diagram{}).transport;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Transport next =
          local_update_wasserstein(m, s.plans()[i], x, s.reconstruct(i), s.reconstruct(i + 1), 2);
      check_local(m, next, s.plans()[i], true);
      m = next;
    }
    validate(m, x, s.reconstruct(s.size()));
  }
}

TEST_CASE("batch update") {
  support::Rng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const Diagram d = support::random_diagram(rng, 30);
    const Diagram x = support::random_diagram(rng, 30);
    const Sketch s = Sketch::build(d);
    const std::size_t i = support::below(rng, s.size() + 1);
    const Transport m = exact_bottleneck(x, s.reconstruct(i)).transport;
    CHECK(batch_update(m, s, x, i, i) == m);

    UpdateStats stats;
    const Transport full = batch_update(m, s, x, i, s.size(), &stats);
    validate(full, x, s.reconstruct(s.size()));
    CHECK(stats.steps == s.size() - i);

    Length bound = cost_bottleneck(m, x, s.reconstruct(i));
    for (std::size_t j = i; j < s.size(); ++j) bound += s.error_at(j) + s.error_at(j + 1);
    CHECK(cost_bottleneck(full, x, s.reconstruct(s.size())) <= bound);

    // Same as folding the single-step update.
    Transport step = m;
    for (std::size_t j = i; j < s.size(); ++j) {
      step = local_update_bottleneck(step, s.plans()[j], x, s.reconstruct(j), s.reconstruct(j + 1));
    }
    CHECK(step == full);
  }
}

TEST_CASE("mismatched plans are rejected") {
  const Sketch s = Sketch::build(dg("0 10\n1 10\n"));
  const Diagram x = dg("1 10\n");
  Transport m;
  m.add(0, 0, 1);
  CHECK_THROWS_AS(naive_update(m, s.plans()[1], x, s.reconstruct(0), s.reconstruct(1)),
                  ValidationError);
  Transport wrong;
  wrong.add(0, kDiagonal, 1);
  CHECK_THROWS_AS(naive_update(wrong, s.plans()[1], x, s.reconstruct(1), s.reconstruct(2)),
                  ValidationError);
}

TEST_CASE("transport text round trip") {
  Transport t;
  t.add(0, 1, 3);
  t.add(kDiagonal, 2, 1);
  t.add(4, kDiagonal, 7);
  std::ostringstream out;
  write_transport(out, t);
  CHECK(out.str() == "0 1 3\n4 diag 7\ndiag 2 1\n");
  std::istringstream in(out.str());
  CHECK(read_transport(in) == t);
  std::istringstream bad("diag diag 1\n");
  CHECK_THROWS_AS(read_transport(bad), ParseError);
}
