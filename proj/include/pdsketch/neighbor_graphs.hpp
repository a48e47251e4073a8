#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pdsketch/matching.hpp"
#include "pdsketch/point.hpp"

namespace pdsketch {

class Sketch;

struct Neighbor {
  Index id;
  Length length;
};

/// Graph on a greedy order p_0, p_1, ... with insertion radii l_j. Holds the
/// edge (p_j, p_i), i < j, exactly when d(p_i, p_j) <= gamma * l_j.
class FilteredGraph {
 public:
  struct Edge {
    Index later;
    Index earlier;
    Length length;
  };

  std::size_t size() const noexcept { return points_.size(); }
  double gamma() const noexcept { return gamma_; }
  std::span<const Point> points() const noexcept { return points_; }
  std::span<const Length> radii() const noexcept { return radii_; }

  /// Earlier and later neighbors of v.
  const std::vector<Neighbor>& neighbors(Index v) const { return adj_[v]; }
  std::size_t back_degree(Index v) const;
  std::size_t max_back_degree() const;

  /// All edges sorted by (later, earlier).
  std::vector<Edge> edges() const;

 private:
  friend FilteredGraph filtered_graph(std::span<const Point>, std::span<const Length>, double);
  double gamma_ = 0;
  std::vector<Point> points_;
  std::vector<Length> radii_;
  std::vector<std::vector<Neighbor>> adj_;
};

/// Throws ValidationError for gamma <= 1, too few or increasing radii.
FilteredGraph filtered_graph(std::span<const Point> order, std::span<const Length> radii,
                             double gamma);
FilteredGraph filtered_graph(const Sketch& s, double gamma);

/// One side of a bipartite construction: the first `count` points of a greedy
/// order with a (2 gamma + 1)-filtered graph over (at least) that prefix.
struct BiSide {
  std::span<const Point> order;
  std::span<const Length> radii;
  const FilteredGraph* graph = nullptr;
  std::size_t count = 0;
};

struct BiGraphStats {
  std::uint64_t probes = 0;            ///< distance evaluations for new cross edges
  std::size_t fallback_queries = 0;    ///< insertions answered by the grid instead
  std::size_t levels = 0;
};

/// BiNbrhd(R_l, B_l, gamma * l) at the last processed scale l. Diagonal edges
/// are implicit: a point sees the other side's diagonal at diag_dist.
struct BiGraph {
  struct Level {
    Length scale;
    Length hausdorff;  ///< d_H of the two prefixes (with diagonal) at this scale
  };

  double gamma = 0;
  Length scale = kInfinity;
  std::size_t left_count = 0;
  std::size_t right_count = 0;
  /// (left, right) pairs with length <= gamma * scale, sorted.
  CandidateEdges edges;
  /// Nearest cross neighbor of every inserted vertex, diagonal included.
  std::vector<Length> left_nn;
  std::vector<Length> right_nn;
  /// First scale at which an inserted vertex had no neighbor within gamma * scale.
  std::optional<Length> isolation_scale;
  /// Every scale without an isolated vertex, in processing order.
  std::vector<Level> levels;
  BiGraphStats stats;
};

/// Inserts both prefixes by decreasing radius (ties: left first, then index).
/// New cross edges are found through the nearest same-side predecessor's
/// cross neighbors and the other side's filtered graph. With
/// `stop_at_isolated` the run ends after the first scale with an isolated
/// vertex. Throws ValidationError when a side has no suitable filtered graph.
BiGraph bipartite_graph(const BiSide& left, const BiSide& right, double gamma,
                        bool stop_at_isolated);
BiGraph bipartite_graph(const Sketch& left, const Sketch& right, double gamma,
                        bool stop_at_isolated);

struct HausdorffEstimate {
  Length lower = 0;
  Length upper = 0;
  Length estimate = 0;
  bool exact = false;  ///< estimate is the exact distance of the sketched points
};

/// Hausdorff distance between the flat diagrams (diagonal included) within a
/// factor 1 +- 1/gamma. For partial sketches the interval also absorbs the
/// sketches' own errors.
HausdorffEstimate approx_hausdorff(const Sketch& left, const Sketch& right, double gamma);

/// Exact Hausdorff distance between two flat point sets, both with the
/// diagonal, using kd-tree nearest-neighbor queries.
Length exact_hausdorff(std::span<const Point> a, std::span<const Point> b);

struct ApproxBottleneck {
  Length value = 0;
  Transport transport;  ///< between left.reconstruct(left_index) and right's
  std::size_t left_index = 0;
  std::size_t right_index = 0;
  Length eps_used = 0;  ///< sum of the two prefix errors
};

/// Bottleneck distance within eps, from prefixes of error <= eps / 2 and a
/// sparse candidate graph. Throws PrecisionUnreachable if a sketch stops short.
ApproxBottleneck approx_bottleneck(const Sketch& left, const Sketch& right, Length eps,
                                   double gamma);

/// `edge i j length` lines.
void write_graph(std::ostream& out, const FilteredGraph& g);
void write_graph(std::ostream& out, const BiGraph& g, std::span<const Point> left,
                 std::span<const Point> right);

}  // namespace pdsketch
