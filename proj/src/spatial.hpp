#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdsketch/point.hpp"

namespace pdsketch::detail {

/// Incremental uniform grid for fixed-radius L-infinity queries. The cell
/// size follows the query radius and is rebuilt once the radius has shrunk
/// by a factor of four.
class GridIndex {
 public:
  void insert(Index id, const Point& p) {
    items_.push_back({id, p});
    if (cell_ > 0) cells_[key(p)].push_back(items_.size() - 1);
  }

  std::size_t size() const noexcept { return items_.size(); }

  /// Calls f(id, point) for every stored point within L-infinity distance r
  /// of c (and possibly a few more; callers test the distance).
  template <class F>
  void query(const Point& c, Length r, F&& f) {
    if (items_.empty()) return;
    if (cell_ == 0 || cell_ > 4 * r || cell_ < r) rebuild(r);
    const std::int64_t x0 = coord(c.birth - r);
    const std::int64_t x1 = coord(c.birth + r);
    const std::int64_t y0 = coord(c.death - r);
    const std::int64_t y1 = coord(c.death + r);
    for (std::int64_t x = x0; x <= x1; ++x) {
      for (std::int64_t y = y0; y <= y1; ++y) {
        auto it = cells_.find(pack(x, y));
        if (it == cells_.end()) continue;
        for (std::size_t k : it->second) f(items_[k].first, items_[k].second);
      }
    }
  }

 private:
  static constexpr double kClamp = 1e15;

  void rebuild(Length r) {
    cell_ = r > 0 ? r : 1;
    cells_.clear();
    for (std::size_t k = 0; k < items_.size(); ++k) cells_[key(items_[k].second)].push_back(k);
  }

  std::int64_t coord(double v) const {
    return static_cast<std::int64_t>(std::clamp(std::floor(v / cell_), -kClamp, kClamp));
  }

  static std::uint64_t pack(std::int64_t x, std::int64_t y) {
    const auto ux = static_cast<std::uint64_t>(x);
    const auto uy = static_cast<std::uint64_t>(y);
    return ux * 0x9E3779B97F4A7C15ULL ^ (uy + 0x632BE59BD9B4E019ULL + (ux << 6) + (ux >> 2));
  }

  std::uint64_t key(const Point& p) const { return pack(coord(p.birth), coord(p.death)); }

  // Hash collisions only add candidates; callers filter by distance.
  double cell_ = 0;
  std::vector<std::pair<Index, Point>> items_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

/// Static 2-d tree under the L-infinity metric.
class KdTree {
 public:
  explicit KdTree(std::span<const Point> pts) {
    nodes_.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) nodes_.push_back({pts[i], i});
    build(0, nodes_.size(), 0);
  }

  bool empty() const noexcept { return nodes_.empty(); }

  /// Distance to and index of the nearest stored point; (inf, kDiagonal) if empty.
  std::pair<Length, Index> nearest(const Point& q) const {
    std::pair<Length, Index> best{kInfinity, kDiagonal};
    nearest(0, nodes_.size(), 0, q, best);
    return best;
  }

  /// Calls f(index, distance) for every stored point within r of q.
  template <class F>
  void within(const Point& q, Length r, F&& f) const {
    within(0, nodes_.size(), 0, q, r, f);
  }

 private:
  struct Node {
    Point p;
    Index id;
  };

  static double axis_of(const Point& p, int axis) { return axis == 0 ? p.birth : p.death; }

  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(nodes_.begin() + lo, nodes_.begin() + mid, nodes_.begin() + hi,
                     [axis](const Node& a, const Node& b) {
                       return axis_of(a.p, axis) < axis_of(b.p, axis);
                     });
    build(lo, mid, 1 - axis);
    build(mid + 1, hi, 1 - axis);
  }

  void nearest(std::size_t lo, std::size_t hi, int axis, const Point& q,
               std::pair<Length, Index>& best) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const Node& n = nodes_[mid];
    const Length d = linf_dist(n.p, q);
    if (d < best.first || (d == best.first && n.id < best.second)) best = {d, n.id};
    const double diff = axis_of(q, axis) - axis_of(n.p, axis);
    const bool left_first = diff < 0;
    if (left_first) {
      nearest(lo, mid, 1 - axis, q, best);
      if (std::abs(diff) <= best.first) nearest(mid + 1, hi, 1 - axis, q, best);
    } else {
      nearest(mid + 1, hi, 1 - axis, q, best);
      if (std::abs(diff) <= best.first) nearest(lo, mid, 1 - axis, q, best);
    }
  }

  template <class F>
  void within(std::size_t lo, std::size_t hi, int axis, const Point& q, Length r, F& f) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const Node& n = nodes_[mid];
    const Length d = linf_dist(n.p, q);
    if (d <= r) f(n.id, d);
    const double diff = axis_of(q, axis) - axis_of(n.p, axis);
    if (diff <= r) within(lo, mid, 1 - axis, q, r, f);
    if (diff >= -r) within(mid + 1, hi, 1 - axis, q, r, f);
  }

  std::vector<Node> nodes_;
};

}  // namespace pdsketch::detail
