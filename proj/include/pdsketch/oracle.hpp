#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pdsketch/diagram.hpp"
#include "pdsketch/greedy.hpp"

namespace pdsketch {

// Brute-force reference implementations. Quadratic or worse, with size caps.

/// Farthest-point traversal seeded with the whole diagonal; same tie rules as
/// build_sketch. Plans come from recounting nearest centers after each step.
GreedyResult brute_greedy(const Diagram& d);

/// A flat point set, optionally joined with the whole diagonal.
struct PointSet {
  std::vector<Point> points;
  bool diagonal = true;
};

PointSet flat(const Diagram& d, bool with_diagonal = true);

/// Hausdorff distance by a double max-min scan. Infinite when one side has
/// the diagonal and the other does not, or when exactly one side is empty.
Length brute_hausdorff(const PointSet& a, const PointSet& b);

inline constexpr Mass kOracleMassCap = 14;

/// Bottleneck distance by unit expansion and Hopcroft-Karp perfect-matching
/// tests over all candidate thresholds. Throws UnsupportedInput when either
/// diagram carries more than `cap` units.
Length brute_bottleneck(const Diagram& a, const Diagram& b, Mass cap = kOracleMassCap);

/// Multiplicities of `subset` (distinct points, in this order) when every unit
/// of `d` moves to its nearest subset point or to the diagonal. Ties go to the
/// diagonal, then to the earlier subset point. Subset points left without
/// mass are dropped.
Diagram natural_reweight(std::span<const Point> subset, const Diagram& d);

/// Best bottleneck error over all i-point subsets of d's distinct points,
/// naturally reweighted. Requires d.size() <= 10.
Length brute_opt_subset(const Diagram& d, std::size_t i);

}  // namespace pdsketch
