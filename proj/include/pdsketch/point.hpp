#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace pdsketch {

/// Distances under the L-infinity norm. Always >= 0; +inf is used as a sentinel.
using Length = double;

/// Multiplicity of a diagram point, or an amount of transported mass.
using Mass = std::uint64_t;

/// Index of a point in some ordered point list. `kDiagonal` stands for the
/// diagonal wherever an index may refer to either a point or the diagonal; it
/// sorts after every real index.
using Index = std::size_t;
inline constexpr Index kDiagonal = std::numeric_limits<Index>::max();

inline constexpr Length kInfinity = std::numeric_limits<Length>::infinity();

/// A (birth, death) pair in the plane. Ordering is lexicographic.
struct Point {
  double birth = 0.0;
  double death = 0.0;

  friend constexpr auto operator<=>(const Point&, const Point&) = default;
};

inline Length linf_dist(const Point& p, const Point& q) {
  return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
}

/// Parameter t of the L-infinity nearest diagonal point (t, t).
inline double diag_param(const Point& p) { return (p.birth + p.death) / 2; }

inline Point diag_proj(const Point& p) {
  const double t = diag_param(p);
  return {t, t};
}

/// Half the persistence: the L-infinity distance from p to the diagonal.
inline Length diag_dist(const Point& p) { return (p.death - p.birth) / 2; }

/// Closest approach of the diagonal piece {(t,t) : lo <= t <= hi} to y.
/// `lo` may be -inf and `hi` may be +inf.
inline Length segment_dist(double lo, double hi, const Point& y) {
  const double t = std::clamp(diag_param(y), lo, hi);
  return linf_dist({t, t}, y);
}

}  // namespace pdsketch
