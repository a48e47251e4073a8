#include "pdsketch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "max_flow.hpp"
#include "pdsketch/errors.hpp"
#include "pdsketch/sketch.hpp"

namespace pdsketch {

// ---------------------------------------------------------------- Transport

void Transport::add(Index a, Index b, Mass m) {
  if (m == 0 || (a == kDiagonal && b == kDiagonal)) return;
  cols_[b][a] += m;
}

Mass Transport::remove(Index a, Index b) {
  auto col = cols_.find(b);
  if (col == cols_.end()) return 0;
  auto it = col->second.find(a);
  if (it == col->second.end()) return 0;
  const Mass m = it->second;
  col->second.erase(it);
  if (col->second.empty()) cols_.erase(col);
  return m;
}

Mass Transport::at(Index a, Index b) const {
  auto col = cols_.find(b);
  if (col == cols_.end()) return 0;
  auto it = col->second.find(a);
  return it == col->second.end() ? 0 : it->second;
}

const std::map<Index, Mass>* Transport::column(Index b) const {
  auto col = cols_.find(b);
  return col == cols_.end() ? nullptr : &col->second;
}

std::vector<Transport::Entry> Transport::entries() const {
  std::vector<Entry> out;
  for (const auto& [b, col] : cols_) {
    for (const auto& [a, m] : col) out.push_back({a, b, m});
  }
  std::sort(out.begin(), out.end(),
            [](const Entry& x, const Entry& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return out;
}

std::size_t Transport::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [b, col] : cols_) n += col.size();
  return n;
}

void validate(const Transport& t, const Diagram& a, const Diagram& b) {
  std::vector<Mass> rows(a.size(), 0);
  std::vector<Mass> cols(b.size(), 0);
  for (const auto& e : t.entries()) {
    if (e.a != kDiagonal) {
      if (e.a >= a.size()) throw ValidationError("transport row index out of range");
      rows[e.a] += e.mass;
    }
    if (e.b != kDiagonal) {
      if (e.b >= b.size()) throw ValidationError("transport column index out of range");
      cols[e.b] += e.mass;
    }
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (rows[i] != a.mult(i)) throw ValidationError("transport row sum differs from multiplicity");
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (cols[j] != b.mult(j)) {
      throw ValidationError("transport column sum differs from multiplicity");
    }
  }
}

Length edge_length(Index a, Index b, const Diagram& da, const Diagram& db) {
  if (a == kDiagonal && b == kDiagonal) return 0;
  if (a == kDiagonal) return diag_dist(db.point(b));
  if (b == kDiagonal) return diag_dist(da.point(a));
  return linf_dist(da.point(a), db.point(b));
}

Length cost_bottleneck(const Transport& t, const Diagram& a, const Diagram& b) {
  validate(t, a, b);
  Length worst = 0;
  for (const auto& e : t.entries()) worst = std::max(worst, edge_length(e.a, e.b, a, b));
  return worst;
}

double cost_wasserstein(const Transport& t, const Diagram& a, const Diagram& b, double p) {
  if (!(p >= 1) || !std::isfinite(p)) throw ValidationError("Wasserstein order must be finite and >= 1");
  validate(t, a, b);
  double sum = 0;
  for (const auto& e : t.entries()) {
    sum += static_cast<double>(e.mass) * std::pow(edge_length(e.a, e.b, a, b), p);
  }
  return std::pow(sum, 1 / p);
}

// ------------------------------------------------------ bottleneck solver

namespace {

// Balanced transportation problem on a bipartite arc list. Arcs are tried in
// the order given; the solver looks for the shortest feasible prefix.
struct FlowProblem {
  std::vector<Mass> supply;
  std::vector<Mass> demand;
  struct Arc {
    std::uint32_t l;
    std::uint32_t r;
    Length len;
  };
  std::vector<Arc> arcs;

  void sort_arcs() {
    std::stable_sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) {
      return std::tie(x.len, x.l, x.r) < std::tie(y.len, y.l, y.r);
    });
  }

  Mass total() const {
    Mass s = 0;
    for (Mass m : supply) s += m;
    return s;
  }

  // Flow on each of the first k arcs if they carry every supply, else nullopt.
  std::optional<std::vector<Mass>> solve_prefix(std::size_t k) const {
    const std::size_t nl = supply.size();
    const std::size_t nr = demand.size();
    const std::size_t src = nl + nr;
    const std::size_t snk = src + 1;
    detail::MaxFlow g(nl + nr + 2);
    for (std::size_t i = 0; i < nl; ++i) {
      if (supply[i] > 0) g.add_edge(src, i, static_cast<detail::MaxFlow::Cap>(supply[i]));
    }
    for (std::size_t j = 0; j < nr; ++j) {
      if (demand[j] > 0) g.add_edge(nl + j, snk, static_cast<detail::MaxFlow::Cap>(demand[j]));
    }
    std::vector<std::size_t> ids(k);
    for (std::size_t e = 0; e < k; ++e) {
      const Arc& a = arcs[e];
      const Mass cap = std::min(supply[a.l], demand[a.r]);
      ids[e] = g.add_edge(a.l, nl + a.r, static_cast<detail::MaxFlow::Cap>(cap));
    }
    const Mass need = total();
    if (static_cast<Mass>(g.run(src, snk)) != need) return std::nullopt;
    std::vector<Mass> flows(k);
    for (std::size_t e = 0; e < k; ++e) flows[e] = static_cast<Mass>(g.flow(ids[e]));
    return flows;
  }

  // Smallest arc count whose prefix is feasible.
  std::pair<std::size_t, std::vector<Mass>> shortest_prefix() const {
    if (total() == 0) return {0, {}};
    std::size_t lo = 1;
    std::size_t hi = arcs.size();
    auto best = solve_prefix(hi);
    if (!best) throw std::logic_error("transportation problem has no feasible solution");
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (auto f = solve_prefix(mid)) {
        hi = mid;
        best = std::move(f);
      } else {
        lo = mid + 1;
      }
    }
    best->resize(hi);
    if (best->size() != hi) throw std::logic_error("prefix bookkeeping");
    return {hi, std::move(*best)};
  }

  // Smallest length L such that all arcs of length <= L are feasible.
  std::pair<std::size_t, std::vector<Mass>> shortest_length_prefix() const {
    if (total() == 0) return {0, {}};
    // Candidate cut points: ends of equal-length runs.
    std::vector<std::size_t> cuts;
    for (std::size_t e = 0; e < arcs.size(); ++e) {
      if (e + 1 == arcs.size() || arcs[e + 1].len != arcs[e].len) cuts.push_back(e + 1);
    }
    std::size_t lo = 0;
    std::size_t hi = cuts.size() - 1;
    auto best = solve_prefix(cuts[hi]);
    if (!best) throw std::logic_error("transportation problem has no feasible solution");
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (auto f = solve_prefix(cuts[mid])) {
        hi = mid;
        best = std::move(f);
      } else {
        lo = mid + 1;
      }
    }
    return {cuts[hi], std::move(*best)};
  }
};

}  // namespace

BottleneckResult exact_bottleneck(const Diagram& a, const Diagram& b, const CandidateEdges* graph) {
  const auto na = static_cast<std::uint32_t>(a.size());
  const auto nb = static_cast<std::uint32_t>(b.size());
  FlowProblem fp;
  for (const auto& e : a) fp.supply.push_back(e.mult);
  fp.supply.push_back(b.total_mass());
  for (const auto& e : b) fp.demand.push_back(e.mult);
  fp.demand.push_back(a.total_mass());

  if (graph != nullptr) {
    for (const auto& [i, j] : *graph) {
      if (i >= na || j >= nb) throw ValidationError("candidate edge out of range");
      fp.arcs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                         linf_dist(a.point(i), b.point(j))});
    }
  } else {
    for (std::uint32_t i = 0; i < na; ++i) {
      for (std::uint32_t j = 0; j < nb; ++j) {
        fp.arcs.push_back({i, j, linf_dist(a.point(i), b.point(j))});
      }
    }
  }
  for (std::uint32_t i = 0; i < na; ++i) fp.arcs.push_back({i, nb, diag_dist(a.point(i))});
  for (std::uint32_t j = 0; j < nb; ++j) fp.arcs.push_back({na, j, diag_dist(b.point(j))});
  fp.arcs.push_back({na, nb, 0});
  fp.sort_arcs();

  BottleneckResult out;
  auto [k, flows] = fp.shortest_length_prefix();
  for (std::size_t e = 0; e < k; ++e) {
    if (flows[e] == 0) continue;
    const auto& arc = fp.arcs[e];
    out.transport.add(arc.l == na ? kDiagonal : arc.l, arc.r == nb ? kDiagonal : arc.r, flows[e]);
    out.value = std::max(out.value, arc.len);
  }
  if (k > 0) out.value = fp.arcs[k - 1].len;
  return out;
}

// --------------------------------------------------------- matching updates

namespace {

// A sketch prefix seen as points plus multiplicities in greedy order.
struct Prefix {
  std::span<const Point> points;
  std::span<const Mass> mult;
};

struct PlanView {
  std::vector<std::pair<Index, Mass>> sources;  // point sources, ascending
  Mass from_diagonal = 0;
  Mass total = 0;
};

PlanView view_of(const TransportationPlan& plan) {
  PlanView v;
  for (const auto& mv : plan.moves) {
    if (mv.source == kDiagonal) {
      v.from_diagonal += mv.mass;
    } else {
      v.sources.push_back({mv.source, mv.mass});
    }
    v.total += mv.mass;
  }
  return v;
}

std::vector<Point> points_of(const Diagram& d) {
  std::vector<Point> p;
  p.reserve(d.size());
  for (const auto& e : d) p.push_back(e.point);
  return p;
}

std::vector<Mass> mults_of(const Diagram& d) {
  std::vector<Mass> m;
  m.reserve(d.size());
  for (const auto& e : d) m.push_back(e.mult);
  return m;
}

// Checks that `after` is `before` plus the planned point, with the planned
// mass taken from the sources.
void check_step(const TransportationPlan& plan, const Diagram& before, const Diagram& after) {
  const std::size_t i = before.size();
  if (plan.target != i || after.size() != i + 1) {
    throw ValidationError("plan target does not match the prefix sizes");
  }
  std::vector<Mass> expect = mults_of(before);
  expect.push_back(0);
  for (const auto& mv : plan.moves) {
    if (mv.source != kDiagonal) {
      if (mv.source >= i || expect[mv.source] <= mv.mass) {
        throw ValidationError("plan source cannot give up the planned mass");
      }
      expect[mv.source] -= mv.mass;
    }
    expect[i] += mv.mass;
  }
  for (std::size_t j = 0; j <= i; ++j) {
    if (j < i && after.point(j) != before.point(j)) {
      throw ValidationError("prefixes disagree on point order");
    }
    if (after.mult(j) != expect[j]) throw ValidationError("plan does not match multiplicities");
  }
}

Length edge_len(const Diagram& x, Index row, const Point* col) {
  if (row == kDiagonal) return col ? diag_dist(*col) : 0.0;
  if (col == nullptr) return diag_dist(x.point(row));
  return linf_dist(x.point(row), *col);
}

// Rows of X matched to the diagonal, keyed by projection parameter.
using DiagIndex = std::set<std::pair<double, Index>>;

DiagIndex index_diagonal(const Transport& m, const Diagram& x) {
  DiagIndex idx;
  if (const auto* col = m.column(kDiagonal)) {
    for (const auto& [row, mass] : *col) idx.insert({diag_param(x.point(row)), row});
  }
  return idx;
}

void naive_step(Transport& m, const PlanView& plan, Index target) {
  for (const auto& [q, need] : plan.sources) {
    Mass left = need;
    std::vector<std::pair<Index, Mass>> take;
    const auto* col = m.column(q);
    if (col == nullptr) throw ValidationError("matching has no mass at a plan source");
    for (const auto& [row, mass] : *col) {
      if (left == 0) break;
      const Mass k = std::min(left, mass);
      take.push_back({row, k});
      left -= k;
    }
    if (left != 0) throw ValidationError("matching has too little mass at a plan source");
    for (const auto& [row, k] : take) {
      const Mass had = m.remove(row, q);
      if (had > k) m.add(row, q, had - k);
      m.add(row, target, k);
    }
  }
  if (plan.from_diagonal > 0) m.add(kDiagonal, target, plan.from_diagonal);
}

// Replaces the block between the affected rows and the sources plus the new
// point with a bottleneck-optimal transport. Rows matched to the diagonal are
// only candidates when their projection lies strictly inside the new point's
// (birth, death) interval: any other such row is at least as far from the new
// point as the new point is from the diagonal, so X's own diagonal serves the
// new point no worse.
void local_step(Transport& m, const PlanView& plan, const Diagram& x, const Prefix& after,
                Index target, DiagIndex& diag_rows, UpdateStats* stats) {
  const Point& p_new = after.points[target];
  const bool via_diag = plan.from_diagonal > 0;

  struct Taken {
    Index row;
    Index col;
    Mass mass;
  };
  std::vector<Taken> taken;
  std::map<Index, Mass> supply;  // row -> supply; kDiagonal row is X's diagonal
  for (const auto& [q, need] : plan.sources) {
    const auto* col = m.column(q);
    if (col == nullptr) throw ValidationError("matching has no mass at a plan source");
    for (const auto& [row, mass] : *col) {
      taken.push_back({row, q, mass});
      supply[row] += mass;
    }
  }
  if (via_diag) {
    const double lo = p_new.birth;
    const double hi = p_new.death;
    for (auto it = diag_rows.upper_bound({lo, kDiagonal}); it != diag_rows.end() && it->first < hi;
         ++it) {
      const Mass mass = m.at(it->second, kDiagonal);
      taken.push_back({it->second, kDiagonal, mass});
      supply[it->second] += mass;
    }
  }

  // Right side: point sources, the new point, then the diagonal if it gives mass.
  std::vector<Index> cols;
  std::vector<Mass> demand;
  for (const auto& [q, need] : plan.sources) {
    if (after.mult[q] > 0) {
      cols.push_back(q);
      demand.push_back(after.mult[q]);
    }
  }
  cols.push_back(target);
  demand.push_back(after.mult[target]);

  std::vector<Index> rows;
  std::vector<Mass> sup;
  Mass point_rows = 0;
  for (const auto& [row, s] : supply) {
    if (row == kDiagonal) continue;
    rows.push_back(row);
    sup.push_back(s);
    point_rows += s;
  }
  Mass point_demand = 0;
  for (Mass d : demand) point_demand += d;
  const bool has_reservoir = via_diag || supply.count(kDiagonal) > 0;
  if (has_reservoir) {
    rows.push_back(kDiagonal);
    sup.push_back(via_diag ? point_demand : supply[kDiagonal]);
  }
  if (via_diag) {
    cols.push_back(kDiagonal);
    demand.push_back(point_rows);
  }

  FlowProblem fp;
  fp.supply = sup;
  fp.demand = demand;
  for (std::uint32_t l = 0; l < rows.size(); ++l) {
    for (std::uint32_t r = 0; r < cols.size(); ++r) {
      if (rows[l] == kDiagonal && cols[r] == kDiagonal) {
        fp.arcs.push_back({l, r, 0});
        continue;
      }
      const Point* cp = cols[r] == kDiagonal ? nullptr : &after.points[cols[r]];
      fp.arcs.push_back({l, r, edge_len(x, rows[l], cp)});
    }
  }
  // Ties resolve toward lower (row, column) indices, the diagonal last.
  std::stable_sort(fp.arcs.begin(), fp.arcs.end(), [&](const auto& a, const auto& b) {
    return std::tie(a.len, rows[a.l], cols[a.r]) < std::tie(b.len, rows[b.l], cols[b.r]);
  });
  if (stats != nullptr) {
    stats->candidate_edges += fp.arcs.size();
    ++stats->steps;
  }

  auto [k, flows] = fp.shortest_prefix();
  for (const auto& t : taken) {
    m.remove(t.row, t.col);
    if (t.col == kDiagonal) diag_rows.erase({diag_param(x.point(t.row)), t.row});
  }
  for (std::size_t e = 0; e < k; ++e) {
    if (flows[e] == 0) continue;
    const Index row = rows[fp.arcs[e].l];
    const Index col = cols[fp.arcs[e].r];
    if (row == kDiagonal && col == kDiagonal) continue;
    m.add(row, col, flows[e]);
    if (col == kDiagonal) diag_rows.insert({diag_param(x.point(row)), row});
  }
}

Prefix prefix_of(const std::vector<Point>& pts, const std::vector<Mass>& mult) {
  return {std::span<const Point>(pts), std::span<const Mass>(mult)};
}

}  // namespace

Transport naive_update(const Transport& m, const TransportationPlan& plan, const Diagram& x,
                       const Diagram& before, const Diagram& after) {
  validate(m, x, before);
  check_step(plan, before, after);
  Transport out = m;
  naive_step(out, view_of(plan), plan.target);
  validate(out, x, after);
  return out;
}

Transport local_update_bottleneck(const Transport& m, const TransportationPlan& plan,
                                  const Diagram& x, const Diagram& before, const Diagram& after,
                                  UpdateStats* stats) {
  validate(m, x, before);
  check_step(plan, before, after);
  Transport out = m;
  const auto pts = points_of(after);
  const auto mult = mults_of(after);
  DiagIndex diag_rows = index_diagonal(out, x);
  local_step(out, view_of(plan), x, prefix_of(pts, mult), plan.target, diag_rows, stats);
  validate(out, x, after);
  return out;
}

Transport local_update_wasserstein(const Transport& m, const TransportationPlan& plan,
                                   const Diagram& x, const Diagram& before, const Diagram& after,
                                   double p) {
  if (!(p >= 1) || !std::isfinite(p)) throw ValidationError("Wasserstein order must be finite and >= 1");
  validate(m, x, before);
  check_step(plan, before, after);
  Transport out = m;
  const Index target = plan.target;
  const Point& p_new = after.point(target);

  for (const auto& mv : plan.moves) {
    struct Unit {
      double delta;
      Index row;
      Mass mass;
    };
    std::vector<Unit> units;
    const Point* q_pt = mv.source == kDiagonal ? nullptr : &before.point(mv.source);
    if (const auto* col = m.column(mv.source)) {
      for (const auto& [row, mass] : *col) {
        const double now = std::pow(edge_len(x, row, q_pt), p);
        const double then = std::pow(edge_len(x, row, &p_new), p);
        units.push_back({then - now, row, mass});
      }
    }
    if (mv.source == kDiagonal) {
      // X's own diagonal can feed the new point without limit.
      units.push_back({std::pow(diag_dist(p_new), p), kDiagonal, mv.mass});
    }
    std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
      return std::tie(a.delta, a.row) < std::tie(b.delta, b.row);
    });
    Mass left = mv.mass;
    for (const auto& u : units) {
      if (left == 0) break;
      const Mass k = std::min(left, u.mass);
      if (u.row != kDiagonal || mv.source != kDiagonal) {
        const Mass had = out.remove(u.row, mv.source);
        if (had > k) out.add(u.row, mv.source, had - k);
      }
      out.add(u.row, target, k);
      left -= k;
    }
    if (left != 0) throw ValidationError("matching has too little mass at a plan source");
  }
  validate(out, x, after);
  return out;
}

Transport batch_update(const Transport& m, const Sketch& s, const Diagram& x, std::size_t i,
                       std::size_t k, UpdateStats* stats) {
  if (i > k || k > s.size()) throw std::out_of_range("batch window out of range");
  validate(m, x, s.reconstruct(i));
  Transport out = m;
  if (i == k) return out;

  const std::vector<Point> pts(s.order().begin(), s.order().begin() + k);
  std::vector<Mass> mult = s.multiplicities(i);
  mult.resize(k, 0);
  DiagIndex diag_rows = index_diagonal(out, x);
  for (std::size_t j = i; j < k; ++j) {
    const auto& plan = s.plans()[j];
    for (const auto& mv : plan.moves) {
      if (mv.source != kDiagonal) mult[mv.source] -= mv.mass;
      mult[j] += mv.mass;
    }
    const Prefix after{std::span<const Point>(pts.data(), j + 1),
                       std::span<const Mass>(mult.data(), j + 1)};
    local_step(out, view_of(plan), x, after, j, diag_rows, stats);
  }
  return out;
}

// ------------------------------------------------------------ serialization

void write_transport(std::ostream& out, const Transport& t) {
  auto slot = [](Index i) { return i == kDiagonal ? std::string("diag") : std::to_string(i); };
  for (const auto& e : t.entries()) out << slot(e.a) << ' ' << slot(e.b) << ' ' << e.mass << '\n';
}

Transport read_transport(std::istream& in) {
  Transport t;
  std::string line;
  std::size_t lineno = 0;
  auto slot = [&](const std::string& tok) -> Index {
    return tok == "diag" ? kDiagonal : static_cast<Index>(parse_mass(tok, lineno));
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string s; fields >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    if (tok.size() != 3) throw ParseError(lineno, "expected 'a b mass'");
    const Index a = slot(tok[0]);
    const Index b = slot(tok[1]);
    if (a == kDiagonal && b == kDiagonal) throw ParseError(lineno, "diagonal-to-diagonal entry");
    const Mass m = parse_mass(tok[2], lineno);
    if (m == 0) throw ParseError(lineno, "zero mass entry");
    t.add(a, b, m);
  }
  return t;
}

}  // namespace pdsketch
