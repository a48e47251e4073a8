#include "pdsketch/generators.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace pdsketch {

std::optional<Family> parse_family(std::string_view name) {
  if (name == "uniform") return Family::uniform;
  if (name == "clustered") return Family::clustered;
  if (name == "collinear-adversarial" || name == "collinear") return Family::collinear;
  return std::nullopt;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::uniform: return "uniform";
    case Family::clustered: return "clustered";
    case Family::collinear: return "collinear-adversarial";
  }
  return "?";
}

namespace {

// std::uniform_real_distribution is implementation-defined; this is not.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Diagram generate(Family f, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DiagramEntry> raw;
  raw.reserve(n);
  switch (f) {
    case Family::uniform:
      for (std::size_t i = 0; i < n; ++i) {
        const double b = 100 * unit(rng);
        const double pers = 50 * (1 - unit(rng));
        raw.push_back({{b, b + pers}, 1});
      }
      break;
    case Family::clustered: {
      const std::size_t groups = std::max<std::size_t>(1, n / 16);
      std::vector<Point> centers;
      for (std::size_t c = 0; c < groups; ++c) {
        const double b = 100 * unit(rng);
        centers.push_back({b, 5 + 45 * unit(rng)});  // (birth, persistence)
      }
      for (std::size_t i = 0; i < n; ++i) {
        const Point& c = centers[i % groups];
        const double b = c.birth + 2 * (unit(rng) - 0.5);
        const double pers = c.death + 2 * (unit(rng) - 0.5);
        raw.push_back({{b, b + pers}, 1});
      }
      break;
    }
    case Family::collinear:
      for (std::size_t k = 1; k <= n; ++k) {
        const auto x = static_cast<double>(k);
        raw.push_back({{2 * x - 1, 2 * x + 1}, 1});
      }
      break;
  }
  return Diagram::normalized(std::move(raw));
}

double spread(const Diagram& d) {
  const std::size_t n = d.size();
  if (n == 0) return 1;
  double lo = kInfinity;
  double hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = diag_dist(d.point(i));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = linf_dist(d.point(i), d.point(j));
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  return hi / lo;
}

}  // namespace pdsketch
