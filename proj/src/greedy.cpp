#include "pdsketch/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>

namespace pdsketch {

Mass TransportationPlan::total() const noexcept {
  Mass m = 0;
  for (const auto& mv : moves) m += mv.mass;
  return m;
}

bool StopRule::satisfied(std::size_t inserted, Length error) const noexcept {
  switch (kind_) {
    case Kind::full:
      return false;
    case Kind::max_points:
      return inserted >= points_;
    case Kind::precision:
      return error <= eps_;
  }
  return false;
}

Segment DiagonalPartition::segment_at(double t) const {
  auto it = params_.find(t);
  if (it == params_.end()) throw std::out_of_range("projection parameter not inserted");
  Segment s;
  s.center_t = t;
  if (it != params_.begin()) s.lo = (*std::prev(it) + t) / 2;
  if (auto next = std::next(it); next != params_.end()) s.hi = (t + *next) / 2;
  return s;
}

Segment DiagonalPartition::segment_containing(double s) const {
  if (params_.empty()) throw std::out_of_range("empty partition");
  auto hi = params_.lower_bound(s);
  if (hi == params_.end()) return segment_at(*std::prev(hi));
  if (hi == params_.begin()) return segment_at(*hi);
  auto lo = std::prev(hi);
  return segment_at(s - *lo <= *hi - s ? *lo : *hi);
}

std::vector<Segment> DiagonalPartition::segments() const {
  std::vector<Segment> out;
  out.reserve(params_.size());
  for (double t : params_) out.push_back(segment_at(t));
  return out;
}

namespace {

// Element ids: [0, n) are diagram points, [n, n + m) are distinct projections.
using Elem = std::uint32_t;
using CellId = std::uint32_t;

enum class CenterKind { point, projection, whole_diagonal };

struct Cell {
  CenterKind kind = CenterKind::point;
  Elem elem = 0;
  Point pos;       // the point, or (t, t) for a projection
  Index order = kDiagonal;  // order index of a point center
  std::vector<Elem> members;
  std::vector<CellId> nbrs;
  Length radius = 0;
  Elem best = 0;
  std::uint64_t version = 0;

  bool diagonal() const noexcept { return kind != CenterKind::point; }
};

struct HeapEntry {
  Length r;
  bool is_point;
  Elem elem;
  CellId cell;
  std::uint64_t version;
};

// Larger radius first, then points before projections, then smaller id.
bool ranks_before(Length ra, bool pa, Elem ea, Length rb, bool pb, Elem eb) {
  if (ra != rb) return ra > rb;
  if (pa != pb) return pa;
  return ea < eb;
}

struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    return ranks_before(b.r, b.is_point, b.elem, a.r, a.is_point, a.elem);
  }
};

class ClarksonBuilder {
 public:
  ClarksonBuilder(const Diagram& d, const BuildOptions& opt, BuildStats& stats)
      : d_(d), opt_(opt), stats_(stats), n_(static_cast<Elem>(d.size())) {}

  GreedyResult run();

 private:
  bool is_point(Elem e) const { return e < n_; }
  const Point& pt(Elem e) const { return d_.point(e); }
  double param(Elem e) const { return is_point(e) ? diag_param(pt(e)) : proj_t_[e - n_]; }

  // Distance of member e to the center of cell c (the d_S / projection distance).
  Length key(const Cell& c, Elem e) const {
    if (c.kind == CenterKind::point) return linf_dist(c.pos, pt(e));
    if (is_point(e)) return diag_dist(pt(e));
    return std::abs(param(e) - c.pos.birth);
  }

  Length center_dist(const Cell& a, const Cell& b) const {
    if (a.kind == CenterKind::whole_diagonal) return diag_dist(b.pos);
    if (b.kind == CenterKind::whole_diagonal) return diag_dist(a.pos);
    return linf_dist(a.pos, b.pos);
  }

  // Whether member e of cell `from` is strictly closer to the new center.
  bool moves(const Cell& from, const Cell& to, Elem e) const {
    if (to.kind == CenterKind::point) {
      return is_point(e) && linf_dist(to.pos, pt(e)) < key(from, e);
    }
    if (from.kind != CenterKind::projection) return false;
    const double t = param(e);
    return std::abs(t - to.pos.birth) < std::abs(t - from.pos.birth);
  }

  bool adjacent(CellId a, CellId b) const {
    return keep_edge(cells_[a].radius, cells_[b].radius, center_dist(cells_[a], cells_[b]));
  }

  void refresh(CellId c);
  void prune(CellId c);
  CellId make_cell(Elem e, CenterKind kind);
  void insert(Elem e, CellId parent);
  void verify() const;
  Index source_of(const Cell& c) const { return c.kind == CenterKind::point ? c.order : kDiagonal; }

  const Diagram& d_;
  const BuildOptions& opt_;
  BuildStats& stats_;
  Elem n_;

  std::vector<double> proj_t_;
  std::vector<Elem> proj_of_;
  std::vector<CellId> home_;     // current cell of each uninserted element
  std::vector<bool> inserted_;
  std::vector<Cell> cells_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t stamp_now_ = 0;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap_;

  GreedyResult out_;
};

void ClarksonBuilder::refresh(CellId id) {
  Cell& c = cells_[id];
  ++c.version;
  c.radius = 0;
  bool have = false;
  for (Elem e : c.members) {
    const Length r = key(c, e);
    if (!have || ranks_before(r, is_point(e), e, c.radius, is_point(c.best), c.best)) {
      c.radius = r;
      c.best = e;
      have = true;
    }
  }
  if (have) heap_.push({c.radius, is_point(c.best), c.best, id, c.version});
}

void ClarksonBuilder::prune(CellId id) {
  auto& nb = cells_[id].nbrs;
  nb.erase(std::remove_if(nb.begin(), nb.end(), [&](CellId o) { return !adjacent(id, o); }),
           nb.end());
}

CellId ClarksonBuilder::make_cell(Elem e, CenterKind kind) {
  Cell c;
  c.kind = kind;
  c.elem = e;
  if (kind == CenterKind::point) {
    c.pos = pt(e);
    c.order = out_.order.size();
  } else if (kind == CenterKind::projection) {
    const double t = param(e);
    c.pos = {t, t};
  }
  cells_.push_back(std::move(c));
  stamp_.push_back(0);
  return static_cast<CellId>(cells_.size() - 1);
}

void ClarksonBuilder::insert(Elem e, CellId parent) {
  const bool point = is_point(e);
  const CellId nc = make_cell(e, point ? CenterKind::point : CenterKind::projection);
  inserted_[e] = true;

  std::map<Index, Mass> plan;
  if (point) plan[source_of(cells_[parent])] += d_.mult(e);

  prune(parent);
  std::vector<CellId> candidates{parent};
  candidates.insert(candidates.end(), cells_[parent].nbrs.begin(), cells_[parent].nbrs.end());

  for (CellId b : candidates) {
    Cell& from = cells_[b];
    std::vector<Elem> kept;
    kept.reserve(from.members.size());
    for (Elem y : from.members) {
      ++stats_.touches;
      if (y == e) continue;
      if (moves(from, cells_[nc], y)) {
        cells_[nc].members.push_back(y);
        home_[y] = nc;
        if (point) plan[source_of(from)] += d_.mult(y);
      } else {
        kept.push_back(y);
      }
    }
    from.members = std::move(kept);
    refresh(b);
  }
  refresh(nc);

  // New neighbors come from the parent's neighbors and their neighbors.
  ++stamp_now_;
  stamp_[nc] = stamp_now_;
  std::vector<CellId> reach;
  auto visit = [&](CellId c) {
    if (stamp_[c] != stamp_now_) {
      stamp_[c] = stamp_now_;
      reach.push_back(c);
    }
  };
  visit(parent);
  for (CellId a : cells_[parent].nbrs) visit(a);
  for (std::size_t k = 1, first_ring = reach.size(); k < first_ring; ++k) {
    const CellId a = reach[k];
    prune(a);
    for (CellId b : cells_[a].nbrs) visit(b);
  }
  for (CellId c : reach) {
    if (adjacent(nc, c)) {
      cells_[nc].nbrs.push_back(c);
      cells_[c].nbrs.push_back(nc);
      stats_.max_degree = std::max(stats_.max_degree, cells_[c].nbrs.size());
    }
  }
  stats_.max_degree = std::max(stats_.max_degree, cells_[nc].nbrs.size());

  if (point) {
    TransportationPlan tp;
    tp.target = out_.order.size();
    for (const auto& [src, mass] : plan) tp.moves.push_back({src, mass});
    out_.order.push_back(pt(e));
    out_.plans.push_back(std::move(tp));
  } else {
    ++stats_.projections_inserted;
  }
  if (opt_.verify) verify();
}

void ClarksonBuilder::verify() const {
  auto fail = [](const std::string& what) { throw std::logic_error("cell check: " + what); };
  const Elem total = static_cast<Elem>(home_.size());
  for (Elem e = 0; e < total; ++e) {
    if (inserted_[e]) continue;
    // Reference cell: nearest point center unless the diagonal is at least as
    // close; within the diagonal the nearest projection, earliest on ties.
    CellId want = 0;
    bool found = false;
    Length best = kInfinity;
    if (is_point(e)) {
      for (CellId c = 0; c < cells_.size(); ++c) {
        if (cells_[c].kind != CenterKind::point) continue;
        const Length dist = linf_dist(cells_[c].pos, pt(e));
        if (dist < best) {
          best = dist;
          want = c;
          found = true;
        }
      }
      if (found && !(best < diag_dist(pt(e)))) found = false;
    }
    if (!found) {
      Length bt = kInfinity;
      for (CellId c = 0; c < cells_.size(); ++c) {
        if (!cells_[c].diagonal()) continue;
        const Length dist = cells_[c].kind == CenterKind::whole_diagonal
                                ? 0.0
                                : std::abs(param(e) - cells_[c].pos.birth);
        if (dist < bt) {
          bt = dist;
          want = c;
        }
      }
    }
    if (home_[e] != want) fail("element " + std::to_string(e) + " in wrong cell");
  }
  for (CellId c = 0; c < cells_.size(); ++c) {
    Length r = 0;
    for (Elem m : cells_[c].members) r = std::max(r, key(cells_[c], m));
    if (r != cells_[c].radius) fail("stale radius");
    for (Elem m : cells_[c].members) {
      if (home_[m] != c) fail("member bookkeeping");
    }
  }
  // Whatever element of cell a is inserted next, every cell losing members
  // to it must be a surviving neighbor of a.
  for (CellId a = 0; a < cells_.size(); ++a) {
    for (Elem x : cells_[a].members) {
      Cell probe;
      probe.kind = is_point(x) ? CenterKind::point : CenterKind::projection;
      probe.pos = is_point(x) ? pt(x) : Point{param(x), param(x)};
      for (CellId b = 0; b < cells_.size(); ++b) {
        if (b == a) continue;
        const auto& mem = cells_[b].members;
        const bool loses = std::any_of(mem.begin(), mem.end(),
                                       [&](Elem y) { return moves(cells_[b], probe, y); });
        if (!loses) continue;
        const auto& nb = cells_[a].nbrs;
        if (!adjacent(a, b) || std::find(nb.begin(), nb.end(), b) == nb.end()) {
          fail("cell " + std::to_string(b) + " missing from the neighbors of " + std::to_string(a));
        }
      }
    }
  }
}

GreedyResult ClarksonBuilder::run() {
  if (n_ == 0) {
    out_.radii.push_back(0);
    return std::move(out_);
  }

  Elem first = 0;
  for (Elem i = 1; i < n_; ++i) {
    const Length a = diag_dist(pt(i));
    const Length b = diag_dist(pt(first));
    if (a > b || (a == b && pt(i) < pt(first))) first = i;
  }

  const bool split = opt_.diagonal == DiagonalMode::projections;
  if (split) {
    std::vector<double> ts;
    ts.reserve(n_);
    for (Elem i = 0; i < n_; ++i) ts.push_back(diag_param(pt(i)));
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    proj_t_ = std::move(ts);
    proj_of_.resize(n_);
    for (Elem i = 0; i < n_; ++i) {
      proj_of_[i] = n_ + static_cast<Elem>(std::lower_bound(proj_t_.begin(), proj_t_.end(),
                                                            diag_param(pt(i))) -
                                           proj_t_.begin());
    }
  }
  const Elem total = n_ + static_cast<Elem>(proj_t_.size());
  home_.assign(total, 0);
  inserted_.assign(total, false);

  // The structure starts from the projection of the first point (or from the
  // whole diagonal) and every other element in that one cell.
  CellId root;
  if (split) {
    root = make_cell(proj_of_[first], CenterKind::projection);
    inserted_[proj_of_[first]] = true;
    ++stats_.projections_inserted;
  } else {
    root = make_cell(0, CenterKind::whole_diagonal);
  }
  for (Elem e = 0; e < total; ++e) {
    if (!inserted_[e]) cells_[root].members.push_back(e);
  }
  refresh(root);

  const Length eps0 = diag_dist(pt(first));
  out_.radii.push_back(eps0);
  std::size_t placed = 0;
  if (!opt_.stop.satisfied(0, eps0)) {
    insert(first, root);
    placed = 1;
    while (placed < n_) {
      if (heap_.empty()) throw std::logic_error("cell queue exhausted early");
      const HeapEntry top = heap_.top();
      heap_.pop();
      const Cell& c = cells_[top.cell];
      if (top.version != c.version) continue;
      if (top.is_point) {
        out_.radii.push_back(top.r);
        if (opt_.stop.satisfied(placed, top.r)) break;
      }
      insert(top.elem, top.cell);
      if (top.is_point) ++placed;
    }
    if (placed == n_) out_.radii.push_back(0);
  }
  // radii[k] must describe the prefix of length k; the loop pushes radii[k]
  // before deciding whether to insert p_k, and a full run appends the final 0.
  if (out_.radii.size() != out_.order.size() + 1) {
    throw std::logic_error("radius bookkeeping mismatch");
  }

  stats_.assignment.assign(n_, kDiagonal);
  for (Elem i = 0; i < n_; ++i) {
    if (inserted_[i]) continue;
    const Cell& c = cells_[home_[i]];
    stats_.assignment[i] = source_of(c);
  }
  for (const Cell& c : cells_) {
    if (c.kind == CenterKind::point) stats_.assignment[c.elem] = c.order;
  }
  return std::move(out_);
}

}  // namespace

GreedyResult build_sketch(const Diagram& d, StopRule stop) {
  BuildOptions opt;
  opt.stop = stop;
  BuildStats stats;
  return build_sketch(d, opt, &stats);
}

GreedyResult build_sketch(const Diagram& d, const BuildOptions& options, BuildStats* stats) {
  BuildStats local;
  BuildStats& s = stats ? *stats : local;
  s = BuildStats{};
  ClarksonBuilder builder(d, options, s);
  return builder.run();
}

}  // namespace pdsketch
