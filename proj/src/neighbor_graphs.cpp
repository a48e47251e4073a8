#include "pdsketch/neighbor_graphs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <tuple>

#include "pdsketch/errors.hpp"
#include "pdsketch/sketch.hpp"
#include "spatial.hpp"

namespace pdsketch {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 1) || !std::isfinite(gamma)) throw ValidationError("gamma must be finite and > 1");
}

}  // namespace

// ------------------------------------------------------------ filtered graph

std::size_t FilteredGraph::back_degree(Index v) const {
  return static_cast<std::size_t>(
      std::count_if(adj_[v].begin(), adj_[v].end(), [v](const Neighbor& n) { return n.id < v; }));
}

std::size_t FilteredGraph::max_back_degree() const {
  std::size_t m = 0;
  for (Index v = 0; v < size(); ++v) m = std::max(m, back_degree(v));
  return m;
}

std::vector<FilteredGraph::Edge> FilteredGraph::edges() const {
  std::vector<Edge> out;
  for (Index j = 0; j < size(); ++j) {
    for (const auto& n : adj_[j]) {
      if (n.id < j) out.push_back({j, n.id, n.length});
    }
  }
  return out;
}

FilteredGraph filtered_graph(std::span<const Point> order, std::span<const Length> radii,
                             double gamma) {
  check_gamma(gamma);
  const std::size_t n = order.size();
  if (radii.size() < n) throw ValidationError("filtered graph needs one radius per point");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(radii[j] >= 0) || !std::isfinite(radii[j])) {
      throw ValidationError("insertion radii must be finite and nonnegative");
    }
    if (j > 0 && radii[j] > radii[j - 1]) throw ValidationError("insertion radii must not increase");
  }

  FilteredGraph g;
  g.gamma_ = gamma;
  g.points_.assign(order.begin(), order.end());
  g.radii_.assign(radii.begin(), radii.begin() + static_cast<std::ptrdiff_t>(n));
  g.adj_.resize(n);

  detail::GridIndex grid;
  for (Index j = 0; j < n; ++j) {
    const Point& p = order[j];
    const Length reach = gamma * radii[j];
    if (reach > 0) {
      grid.query(p, reach, [&](Index i, const Point& q) {
        const Length d = linf_dist(p, q);
        if (d <= reach) g.adj_[j].push_back({i, d});
      });
      std::sort(g.adj_[j].begin(), g.adj_[j].end(),
                [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
      for (const auto& nb : g.adj_[j]) g.adj_[nb.id].push_back({j, nb.length});
    }
    grid.insert(j, p);
  }
  return g;
}

FilteredGraph filtered_graph(const Sketch& s, double gamma) {
  return filtered_graph(s.order(), s.radii(), gamma);
}

// ----------------------------------------------------------- bipartite graph

namespace {

struct SideState {
  const BiSide* in = nullptr;
  std::vector<Index> parent;  // nearest earlier point at distance <= radius
  std::vector<char> inserted;
  std::vector<std::vector<Neighbor>> adj;  // cross edges, pruned lazily
  std::vector<Length> nn;
  std::vector<std::uint64_t> stamp;
  detail::GridIndex grid;
  std::size_t count = 0;

  void init(const BiSide& side, double gamma) {
    in = &side;
    const std::size_t n = side.count;
    if (n > side.order.size() || side.radii.size() < n) {
      throw ValidationError("bipartite side has fewer points or radii than its count");
    }
    if (side.graph == nullptr) throw ValidationError("bipartite side lacks a filtered graph");
    const FilteredGraph& g = *side.graph;
    if (g.size() < n || g.gamma() < 2 * gamma + 1) {
      throw ValidationError("bipartite side needs a (2 gamma + 1)-filtered graph over its points");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (g.points()[j] != side.order[j] || g.radii()[j] != side.radii[j]) {
        throw ValidationError("filtered graph does not match the side's greedy order");
      }
    }
    parent.assign(n, kDiagonal);
    for (Index j = 0; j < n; ++j) {
      Length best = kInfinity;
      for (const auto& nb : g.neighbors(j)) {
        if (nb.id < j && nb.length < best) {
          best = nb.length;
          parent[j] = nb.id;
        }
      }
      if (best > side.radii[j]) parent[j] = kDiagonal;
    }
    inserted.assign(n, 0);
    adj.assign(n, {});
    nn.assign(n, kInfinity);
    stamp.assign(n, 0);
  }

  const Point& point(Index v) const { return in->order[v]; }
};

struct Event {
  Length radius;
  int side;
  Index id;
};

class BiBuilder {
 public:
  BiBuilder(const BiSide& left, const BiSide& right, double gamma) : gamma_(gamma) {
    check_gamma(gamma);
    side_[0].init(left, gamma);
    side_[1].init(right, gamma);
  }

  BiGraph run(bool stop_at_isolated) {
    std::vector<Event> events;
    for (int s = 0; s < 2; ++s) {
      for (Index j = 0; j < side_[s].in->count; ++j) {
        events.push_back({side_[s].in->radii[j], s, j});
      }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      if (a.radius != b.radius) return a.radius > b.radius;
      return std::tie(a.side, a.id) < std::tie(b.side, b.id);
    });

    out_.gamma = gamma_;
    std::size_t e = 0;
    while (e < events.size()) {
      const Length lambda = events[e].radius;
      const Length reach = gamma_ * lambda;
      for (; e < events.size() && events[e].radius == lambda; ++e) {
        insert(events[e].side, events[e].id, reach);
      }
      out_.scale = lambda;
      ++out_.stats.levels;

      const Length h = worst_nn();
      if (h > reach) {
        if (!out_.isolation_scale) out_.isolation_scale = lambda;
        if (stop_at_isolated) break;
      } else {
        out_.levels.push_back({lambda, h});
      }
    }
    finish();
    return std::move(out_);
  }

 private:
  using HeapEntry = std::tuple<Length, int, Index>;

  Length worst_nn() {
    while (!heap_.empty()) {
      const auto [d, s, v] = heap_.top();
      if (side_[s].nn[v] == d) return d;
      heap_.pop();
    }
    return 0;
  }

  void lower_nn(int s, Index v, Length d) {
    auto& nn = side_[s].nn[v];
    if (d < nn) {
      nn = d;
      heap_.push({d, s, v});
    }
  }

  void insert(int s, Index v, Length reach) {
    SideState& me = side_[s];
    SideState& other = side_[1 - s];
    const Point& p = me.point(v);
    me.inserted[v] = 1;
    lower_nn(s, v, diag_dist(p));
    ++tick_;

    auto probe = [&](Index w) {
      if (other.stamp[w] == tick_) return;
      other.stamp[w] = tick_;
      ++out_.stats.probes;
      const Length d = linf_dist(p, other.point(w));
      if (d > reach) return;
      me.adj[v].push_back({w, d});
      other.adj[w].push_back({v, d});
      lower_nn(s, v, d);
      lower_nn(1 - s, w, d);
    };

    // Any cross neighbor z of the parent y within reach works: a point b of
    // the other side within reach of v has d(z, b) <= (2 gamma + 1) lambda,
    // so b is adjacent to z in the other side's filtered graph.
    Index z = kDiagonal;
    if (const Index y = me.parent[v]; y != kDiagonal) {
      auto& list = me.adj[y];
      std::erase_if(list, [reach](const Neighbor& n) { return n.length > reach; });
      if (!list.empty()) z = list.front().id;
    }
    if (z != kDiagonal) {
      probe(z);
      for (const auto& nb : other.in->graph->neighbors(z)) {
        if (nb.id < other.in->count && other.inserted[nb.id]) probe(nb.id);
      }
    } else {
      ++out_.stats.fallback_queries;
      if (reach > 0) other.grid.query(p, reach, [&](Index w, const Point&) { probe(w); });
    }
    me.grid.insert(v, p);
  }

  void finish() {
    const Length reach = gamma_ * out_.scale;
    for (int s = 0; s < 2; ++s) {
      const auto& st = side_[s];
      const auto n = static_cast<std::size_t>(std::count(st.inserted.begin(), st.inserted.end(), 1));
      auto& nn = s == 0 ? out_.left_nn : out_.right_nn;
      nn.assign(st.nn.begin(), st.nn.begin() + static_cast<std::ptrdiff_t>(n));
      (s == 0 ? out_.left_count : out_.right_count) = n;
    }
    for (Index v = 0; v < out_.left_count; ++v) {
      for (const auto& nb : side_[0].adj[v]) {
        if (nb.length <= reach) out_.edges.push_back({v, nb.id});
      }
    }
    std::sort(out_.edges.begin(), out_.edges.end());
  }

  double gamma_;
  SideState side_[2];
  std::priority_queue<HeapEntry> heap_;
  std::uint64_t tick_ = 0;
  BiGraph out_;
};

}  // namespace

BiGraph bipartite_graph(const BiSide& left, const BiSide& right, double gamma,
                        bool stop_at_isolated) {
  return BiBuilder(left, right, gamma).run(stop_at_isolated);
}

BiGraph bipartite_graph(const Sketch& left, const Sketch& right, double gamma,
                        bool stop_at_isolated) {
  check_gamma(gamma);
  const FilteredGraph gl = filtered_graph(left, 2 * gamma + 1);
  const FilteredGraph gr = filtered_graph(right, 2 * gamma + 1);
  return bipartite_graph({left.order(), left.radii(), &gl, left.size()},
                         {right.order(), right.radii(), &gr, right.size()}, gamma,
                         stop_at_isolated);
}

// ------------------------------------------------------- Hausdorff distance

Length exact_hausdorff(std::span<const Point> a, std::span<const Point> b) {
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    const detail::KdTree tree(to);
    Length worst = 0;
    for (const auto& p : from) worst = std::max(worst, std::min(diag_dist(p), tree.nearest(p).first));
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

namespace {

// Error of the prefix holding every point whose radius is at least `scale`.
Length tail_error(const Sketch& s, Length scale) {
  const auto r = s.radii();
  const auto inserted = std::partition_point(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(s.size()),
                                             [scale](Length x) { return x >= scale; });
  return *inserted;
}

}  // namespace

HausdorffEstimate approx_hausdorff(const Sketch& left, const Sketch& right, double gamma) {
  check_gamma(gamma);
  const BiGraph g = bipartite_graph(left, right, gamma, true);
  const Length tail = left.radii().back() + right.radii().back();

  // Bounds on the distance between the full diagrams.
  Length lo = 0;
  Length hi = kInfinity;
  Length guess = 0;
  if (!g.isolation_scale) {
    const Length h = g.levels.empty() ? 0 : g.levels.back().hausdorff;
    if (tail == 0) {
      return {h * (gamma - 1) / gamma, h * (gamma + 1) / gamma, h, true};
    }
    lo = std::max<Length>(0, h - tail);
    hi = h + tail;
    guess = h;
  } else {
    const Length lambda = *g.isolation_scale;
    lo = lambda * (gamma - 1);
    guess = gamma * lambda;
    if (!g.levels.empty()) {
      const auto& prev = g.levels.back();
      const Length rho = tail_error(left, prev.scale) + tail_error(right, prev.scale);
      lo = std::max(lo, prev.hausdorff - rho);
      hi = prev.hausdorff + rho;
    }
  }

  // r is certified when both r (1 - 1/gamma) <= lo and r (1 + 1/gamma) >= hi.
  const Length r_min = gamma * hi / (gamma + 1);
  const Length r_max = gamma * lo / (gamma - 1);
  if (r_min <= r_max) {
    const Length r = std::clamp(guess, r_min, r_max);
    return {r * (gamma - 1) / gamma, r * (gamma + 1) / gamma, r, false};
  }

  const Length h = exact_hausdorff(left.order(), right.order());
  if (tail == 0) return {h * (gamma - 1) / gamma, h * (gamma + 1) / gamma, h, true};
  lo = std::max({lo, h - tail, Length{0}});
  hi = std::min(hi, h + tail);
  const Length cert_min = gamma * hi / (gamma + 1);
  const Length cert_max = gamma * lo / (gamma - 1);
  if (cert_min <= cert_max) {
    const Length r = std::clamp(h, cert_min, cert_max);
    return {r * (gamma - 1) / gamma, r * (gamma + 1) / gamma, r, false};
  }
  return {lo, hi, h, false};
}

// ------------------------------------------------------ bottleneck distance

ApproxBottleneck approx_bottleneck(const Sketch& left, const Sketch& right, Length eps,
                                   double gamma) {
  check_gamma(gamma);
  if (!(eps >= 0)) throw ValidationError("eps must be nonnegative");
  ApproxBottleneck out;
  out.left_index = left.min_index_for_error(eps / 2);
  out.right_index = right.min_index_for_error(eps / 2);
  out.eps_used = left.radii()[out.left_index] + right.radii()[out.right_index];
  const Diagram a = left.reconstruct(out.left_index);
  const Diagram b = right.reconstruct(out.right_index);

  const std::size_t i = out.left_index;
  const std::size_t j = out.right_index;
  const FilteredGraph gl = filtered_graph(left.order().first(i), left.radii(), 2 * gamma + 1);
  const FilteredGraph gr = filtered_graph(right.order().first(j), right.radii(), 2 * gamma + 1);
  const BiGraph g = bipartite_graph({left.order(), left.radii(), &gl, i},
                                    {right.order(), right.radii(), &gr, j}, gamma, false);

  // Every edge up to `reach` is a candidate. An optimum at or below reach only
  // uses candidates, so the restricted optimum is the true one.
  Length reach = gamma * g.scale;
  CandidateEdges edges = g.edges;
  std::vector<Point> pa(left.order().begin(), left.order().begin() + static_cast<std::ptrdiff_t>(i));
  std::vector<Point> pb(right.order().begin(), right.order().begin() + static_cast<std::ptrdiff_t>(j));
  for (;;) {
    BottleneckResult res = exact_bottleneck(a, b, &edges);
    if (res.value <= reach) {
      out.value = res.value;
      out.transport = std::move(res.transport);
      return out;
    }
    reach *= 2;
    edges.clear();
    const detail::KdTree tree(pb);
    for (Index u = 0; u < pa.size(); ++u) {
      tree.within(pa[u], reach, [&](Index w, Length) { edges.push_back({u, w}); });
    }
    std::sort(edges.begin(), edges.end());
  }
}

// ---------------------------------------------------------------- graph dump

void write_graph(std::ostream& out, const FilteredGraph& g) {
  for (const auto& e : g.edges()) {
    out << "edge " << e.later << ' ' << e.earlier << ' ' << format_real(e.length) << '\n';
  }
}

void write_graph(std::ostream& out, const BiGraph& g, std::span<const Point> left,
                 std::span<const Point> right) {
  for (const auto& [u, w] : g.edges) {
    out << "edge " << u << ' ' << w << ' ' << format_real(linf_dist(left[u], right[w])) << '\n';
  }
}

}  // namespace pdsketch
