#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pdsketch/point.hpp"

namespace pdsketch {

struct DiagramEntry {
  Point point;
  Mass mult = 1;

  friend bool operator==(const DiagramEntry&, const DiagramEntry&) = default;
};

/// A persistence diagram: a finite multiset of off-diagonal points. The
/// diagonal is implicit with infinite multiplicity.
///
/// Entries are distinct points with multiplicity >= 1. Diagrams produced by
/// `normalized` (and by the parser) are sorted lexicographically; diagrams
/// produced by `from_ordered` keep the caller's order, which is how sketch
/// prefixes keep their greedy order.
class Diagram {
 public:
  Diagram() = default;

  /// Merges duplicate points, drops zero-persistence points and sorts.
  /// Throws ValidationError for death < birth or a zero multiplicity and
  /// UnsupportedInput for non-finite coordinates.
  static Diagram normalized(std::vector<DiagramEntry> raw, std::size_t* dropped = nullptr);

  /// Keeps the given order. Entries must already be distinct, off-diagonal
  /// and carry positive multiplicity.
  static Diagram from_ordered(std::vector<DiagramEntry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const DiagramEntry& operator[](std::size_t i) const { return entries_[i]; }
  const Point& point(std::size_t i) const { return entries_[i].point; }
  Mass mult(std::size_t i) const { return entries_[i].mult; }
  std::span<const DiagramEntry> entries() const noexcept { return entries_; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  Mass total_mass() const noexcept;
  Length max_diag_dist() const noexcept;

  friend bool operator==(const Diagram&, const Diagram&) = default;

 private:
  explicit Diagram(std::vector<DiagramEntry> entries) : entries_(std::move(entries)) {}
  std::vector<DiagramEntry> entries_;
};

/// Upper limit on the total mass of one diagram; flows add masses of two
/// diagrams in signed 64-bit arithmetic.
inline constexpr Mass kMaxTotalMass = Mass{1} << 61;

struct ParsedDiagram {
  Diagram diagram;
  std::size_t dropped = 0;  ///< zero-persistence points removed
};

/// Reads `birth death [multiplicity]` lines. `#` starts a comment.
ParsedDiagram parse_diagram(std::istream& in);
ParsedDiagram parse_diagram(const std::string& text);

/// One `birth death multiplicity` line per entry, in entry order.
void write_diagram(std::ostream& out, const Diagram& d);

/// Shortest decimal text that reads back to exactly the same double.
std::string format_real(double x);

/// Strict decimal parse of a whole token; throws ParseError(line) on failure.
double parse_real(const std::string& token, std::size_t line);
Mass parse_mass(const std::string& token, std::size_t line);

}  // namespace pdsketch
