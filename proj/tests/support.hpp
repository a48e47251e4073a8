#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pdsketch/diagram.hpp"

namespace support {

using pdsketch::Diagram;
using pdsketch::DiagramEntry;
using pdsketch::Mass;
using Rng = std::mt19937_64;

inline std::size_t below(Rng& rng, std::size_t k) { return static_cast<std::size_t>(rng() % k); }

/// Points on a grid of spacing `step` (a power of two keeps all arithmetic
/// exact): births in [0, span·step], persistence in [step, span·step].
/// Multiplicities 1..max_mult, total mass capped at `mass_cap` (0: no cap).
inline Diagram random_diagram(Rng& rng, std::size_t max_points, Mass mass_cap = 0,
                              double step = 0.125, std::size_t span = 96,
                              Mass max_mult = 3) {
  const std::size_t n = below(rng, max_points + 1);
  std::vector<DiagramEntry> raw;
  Mass total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Mass m = 1 + below(rng, max_mult);
    if (mass_cap != 0) {
      if (total >= mass_cap) break;
      m = std::min(m, mass_cap - total);
    }
    const double b = step * static_cast<double>(below(rng, span + 1));
    const double p = step * static_cast<double>(1 + below(rng, span));
    raw.push_back({{b, b + p}, m});
    total += m;
  }
  return Diagram::normalized(std::move(raw));
}

/// Small integer grid: many equal distances, many ties.
inline Diagram tie_diagram(Rng& rng, std::size_t max_points, Mass mass_cap = 0) {
  return random_diagram(rng, max_points, mass_cap, 1.0, 6, 2);
}

/// Least-squares slope of log(y) against log(x).
inline double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace support
