#include "pdsketch/oracle.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "pdsketch/errors.hpp"

namespace pdsketch {

GreedyResult brute_greedy(const Diagram& d) {
  const std::size_t n = d.size();
  GreedyResult g;
  // dist[x]: distance from x to the inserted centers and the diagonal.
  // owner[x]: center holding x, kDiagonal while the diagonal does.
  std::vector<Length> dist(n);
  std::vector<Index> owner(n, kDiagonal);
  std::vector<bool> taken(n, false);
  for (std::size_t x = 0; x < n; ++x) dist[x] = diag_dist(d.point(x));

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t far = 0;
    Length eps = -1;
    for (std::size_t x = 0; x < n; ++x) {
      if (!taken[x] && dist[x] > eps) {
        eps = dist[x];
        far = x;
      }
    }
    g.radii.push_back(eps);
    g.order.push_back(d.point(far));
    taken[far] = true;

    std::map<Index, Mass> moved;
    for (std::size_t x = 0; x < n; ++x) {
      const Length r = linf_dist(d.point(x), d.point(far));
      if (r < dist[x]) {
        moved[owner[x]] += d.mult(x);
        dist[x] = r;
        owner[x] = step;
      }
    }
    TransportationPlan plan;
    plan.target = step;
    for (const auto& [src, mass] : moved) plan.moves.push_back({src, mass});
    g.plans.push_back(std::move(plan));
  }
  g.radii.push_back(0);
  return g;
}

PointSet flat(const Diagram& d, bool with_diagonal) {
  PointSet s;
  s.diagonal = with_diagonal;
  for (const auto& e : d) s.points.push_back(e.point);
  return s;
}

namespace {

// sup over a of the distance from a to b
Length directed(const PointSet& a, const PointSet& b) {
  if (a.diagonal && !b.diagonal) return kInfinity;
  Length worst = 0;
  for (const auto& p : a.points) {
    Length best = b.diagonal ? diag_dist(p) : kInfinity;
    for (const auto& q : b.points) best = std::min(best, linf_dist(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

// Hopcroft-Karp on a dense cost matrix restricted to cost <= limit.
class PerfectMatching {
 public:
  explicit PerfectMatching(const std::vector<std::vector<Length>>& cost)
      : cost_(cost), n_(cost.size()) {}

  bool feasible(Length limit) {
    limit_ = limit;
    match_l_.assign(n_, kNone);
    match_r_.assign(n_, kNone);
    std::size_t size = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < n_; ++u) {
        if (match_l_[u] == kNone && dfs(u)) ++size;
      }
    }
    return size == n_;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool bfs() {
    std::queue<std::size_t> q;
    dist_.assign(n_, kNone);
    for (std::size_t u = 0; u < n_; ++u) {
      if (match_l_[u] == kNone) {
        dist_[u] = 0;
        q.push(u);
      }
    }
    bool reachable = false;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n_; ++v) {
        if (cost_[u][v] > limit_) continue;
        const std::size_t w = match_r_[v];
        if (w == kNone) {
          reachable = true;
        } else if (dist_[w] == kNone) {
          dist_[w] = dist_[u] + 1;
          q.push(w);
        }
      }
    }
    return reachable;
  }

  bool dfs(std::size_t u) {
    for (std::size_t v = 0; v < n_; ++v) {
      if (cost_[u][v] > limit_) continue;
      const std::size_t w = match_r_[v];
      if (w == kNone || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kNone;
    return false;
  }

  const std::vector<std::vector<Length>>& cost_;
  std::size_t n_;
  Length limit_ = 0;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

std::vector<Point> units(const Diagram& d, Mass cap) {
  if (d.total_mass() > cap) throw UnsupportedInput("diagram too large for the brute-force oracle");
  std::vector<Point> u;
  for (const auto& e : d) u.insert(u.end(), e.mult, e.point);
  return u;
}

}  // namespace

Length brute_hausdorff(const PointSet& a, const PointSet& b) {
  return std::max(directed(a, b), directed(b, a));
}

Length brute_bottleneck(const Diagram& a, const Diagram& b, Mass cap) {
  const auto ua = units(a, cap);
  const auto ub = units(b, cap);
  const std::size_t na = ua.size();
  const std::size_t nb = ub.size();
  const std::size_t n = na + nb;
  if (n == 0) return 0;

  // Left: A units, then one diagonal copy per B unit. Right: B units, then
  // one diagonal copy per A unit.
  std::vector<std::vector<Length>> cost(n, std::vector<Length>(n, 0));
  std::vector<Length> lengths{0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Length c = 0;
      if (i < na && j < nb) {
        c = linf_dist(ua[i], ub[j]);
      } else if (i < na) {
        c = diag_dist(ua[i]);
      } else if (j < nb) {
        c = diag_dist(ub[j]);
      }
      cost[i][j] = c;
      lengths.push_back(c);
    }
  }
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  PerfectMatching pm(cost);
  std::size_t lo = 0;
  std::size_t hi = lengths.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (pm.feasible(lengths[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lengths[lo];
}

Diagram natural_reweight(std::span<const Point> subset, const Diagram& d) {
  std::vector<Mass> mass(subset.size(), 0);
  for (const auto& e : d) {
    Length best = diag_dist(e.point);
    std::size_t owner = subset.size();
    for (std::size_t s = 0; s < subset.size(); ++s) {
      const Length r = linf_dist(e.point, subset[s]);
      if (r < best) {
        best = r;
        owner = s;
      }
    }
    if (owner < subset.size()) mass[owner] += e.mult;
  }
  std::vector<DiagramEntry> out;
  for (std::size_t s = 0; s < subset.size(); ++s) {
    if (mass[s] > 0) out.push_back({subset[s], mass[s]});
  }
  return Diagram::from_ordered(std::move(out));
}

Length brute_opt_subset(const Diagram& d, std::size_t i) {
  const std::size_t n = d.size();
  if (n > 10) throw UnsupportedInput("brute_opt_subset is limited to 10 distinct points");
  if (i > n) throw std::out_of_range("subset size exceeds the diagram");
  const Mass cap = std::max(kOracleMassCap, d.total_mass());

  Length best = kInfinity;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(i), true);
  do {
    std::vector<Point> subset;
    for (std::size_t k = 0; k < n; ++k) {
      if (pick[k]) subset.push_back(d.point(k));
    }
    best = std::min(best, brute_bottleneck(natural_reweight(subset, d), d, cap));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace pdsketch
