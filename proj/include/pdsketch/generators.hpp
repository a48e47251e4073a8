#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pdsketch/diagram.hpp"

namespace pdsketch {

enum class Family {
  uniform,    ///< births in [0, 100], persistence in (0, 50]
  clustered,  ///< tight groups around a few uniform centers
  collinear,  ///< (2k-1, 2k+1): unit distance from the diagonal, two apart
};

std::optional<Family> parse_family(std::string_view name);
std::string family_name(Family f);

/// Draws n points (duplicates merge). Same seed, same diagram on every platform.
Diagram generate(Family f, std::size_t n, std::uint64_t seed);

/// Largest over smallest pairwise distance, the diagonal counted as one more
/// point. 1 when there is nothing to compare.
double spread(const Diagram& d);

}  // namespace pdsketch
