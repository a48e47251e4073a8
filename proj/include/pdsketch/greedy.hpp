#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "pdsketch/diagram.hpp"
#include "pdsketch/point.hpp"

namespace pdsketch {

/// One source of mass moving into a newly inserted greedy point.
struct PlanMove {
  Index source = kDiagonal;  ///< earlier order index, or kDiagonal
  Mass mass = 0;

  friend bool operator==(const PlanMove&, const PlanMove&) = default;
};

/// Mass moved into order[target] when it is inserted. Moves are sorted by
/// source with the diagonal last.
struct TransportationPlan {
  Index target = 0;
  std::vector<PlanMove> moves;

  Mass total() const noexcept;
  friend bool operator==(const TransportationPlan&, const TransportationPlan&) = default;
};

/// Greedy permutation of the distinct points of a diagram together with the
/// insertion radii and the per-step transportation plans.
///
/// `radii` has one more entry than `order`: radii[i] is the Hausdorff error of
/// the first i points (diagonal included), so the last entry is 0 for a full
/// sketch and the reached precision for a partial one.
struct GreedyResult {
  std::vector<Point> order;
  std::vector<Length> radii;
  std::vector<TransportationPlan> plans;

  friend bool operator==(const GreedyResult&, const GreedyResult&) = default;
};

class StopRule {
 public:
  enum class Kind { full, max_points, precision };

  static StopRule full() { return StopRule(Kind::full, 0, 0); }
  static StopRule max_points(std::size_t k) { return StopRule(Kind::max_points, k, 0); }
  static StopRule precision(Length eps) { return StopRule(Kind::precision, 0, eps); }

  Kind kind() const noexcept { return kind_; }
  std::size_t points() const noexcept { return points_; }
  Length eps() const noexcept { return eps_; }

  /// True once a prefix of `inserted` points with error `error` is enough.
  bool satisfied(std::size_t inserted, Length error) const noexcept;

 private:
  StopRule(Kind k, std::size_t p, Length e) : kind_(k), points_(p), eps_(e) {}
  Kind kind_;
  std::size_t points_;
  Length eps_;
};

/// How the diagonal takes part in the discrete Voronoi structure.
enum class DiagonalMode {
  /// The diagonal is split into segments around inserted projections.
  projections,
  /// The whole diagonal is a single center. Correct but quadratic on
  /// point sets hugging the diagonal; kept for comparison.
  single_point,
};

struct BuildOptions {
  StopRule stop = StopRule::full();
  DiagonalMode diagonal = DiagonalMode::projections;
  /// Cross-check cells, radii and neighbor lists by brute force after every
  /// insertion. Quadratic per step; for tests.
  bool verify = false;
};

struct BuildStats {
  std::uint64_t touches = 0;  ///< membership checks of uninserted elements
  std::size_t projections_inserted = 0;
  std::size_t max_degree = 0;  ///< largest neighbor list seen
  /// Final nearest center of every input point: an order index, or kDiagonal.
  std::vector<Index> assignment;
};

/// Builds the greedy sketch data with the Clarkson-style cell structure.
/// The first point is one of maximum persistence (lexicographically smallest
/// on ties); later ties go to the smallest input index. A point equidistant
/// from several centers stays with the earliest one, the diagonal counting as
/// earliest.
GreedyResult build_sketch(const Diagram& d, StopRule stop = StopRule::full());
GreedyResult build_sketch(const Diagram& d, const BuildOptions& options, BuildStats* stats);

/// Neighbor pruning rule of the cell graph: keep while the centers are within
/// four times the larger radius.
inline bool keep_edge(Length rad_a, Length rad_b, Length dist_ab) {
  return dist_ab <= 4 * std::max(rad_a, rad_b);
}

/// Radius contribution of `y` to a cell: distance to the diagonal when the
/// center is diagonal (`std::nullopt`), plain distance otherwise.
inline Length proj_distance(const std::optional<Point>& center, const Point& y) {
  return center ? linf_dist(*center, y) : diag_dist(y);
}

/// The piece of the diagonal owned by an inserted projection (t, t).
struct Segment {
  double center_t = 0;
  double lo = -kInfinity;
  double hi = kInfinity;
};

inline Length d_seg(const Segment& s, const Point& y) { return segment_dist(s.lo, s.hi, y); }

/// Inserted projection parameters and the segments they induce; boundaries
/// sit at midpoints between consecutive parameters.
class DiagonalPartition {
 public:
  /// Returns false if t was already present.
  bool insert(double t) { return params_.insert(t).second; }
  bool empty() const noexcept { return params_.empty(); }
  std::size_t size() const noexcept { return params_.size(); }

  Segment segment_at(double t) const;  ///< requires t to be inserted
  /// Segment whose closed range contains s (the lower one on a boundary).
  Segment segment_containing(double s) const;
  std::vector<Segment> segments() const;

 private:
  std::set<double> params_;
};

}  // namespace pdsketch
