#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

namespace pdsketch::detail {

/// Dinic's algorithm on integer capacities. Edges are explored in insertion
/// order, so results are deterministic.
class MaxFlow {
 public:
  using Cap = std::int64_t;

  explicit MaxFlow(std::size_t nodes) : adj_(nodes), level_(nodes), it_(nodes) {}

  std::size_t add_edge(std::size_t from, std::size_t to, Cap cap) {
    const std::size_t id = edges_.size();
    edges_.push_back({to, cap, 0});
    adj_[from].push_back(id);
    edges_.push_back({from, 0, 0});
    adj_[to].push_back(id + 1);
    return id;
  }

  Cap flow(std::size_t edge) const { return edges_[edge].flow; }

  Cap run(std::size_t s, std::size_t t) {
    Cap total = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (Cap pushed = dfs(s, t, std::numeric_limits<Cap>::max())) total += pushed;
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    Cap cap;
    Cap flow;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t id : adj_[u]) {
        const Edge& e = edges_[id];
        if (e.flow < e.cap && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  Cap dfs(std::size_t u, std::size_t t, Cap limit) {
    if (u == t) return limit;
    for (std::size_t& k = it_[u]; k < adj_[u].size(); ++k) {
      const std::size_t id = adj_[u][k];
      Edge& e = edges_[id];
      if (e.flow < e.cap && level_[e.to] == level_[u] + 1) {
        const Cap got = dfs(e.to, t, std::min(limit, e.cap - e.flow));
        if (got > 0) {
          e.flow += got;
          edges_[id ^ 1].flow -= got;
          return got;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace pdsketch::detail
