#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pdsketch/diagram.hpp"
#include "pdsketch/greedy.hpp"

namespace pdsketch {

/// A greedy PD sketch stored in O(n) numbers: the greedy order, the insertion
/// radii and one sparse transportation plan per inserted point. The prefix
/// diagrams D_0..D_k are rebuilt on demand by replaying plans.
class Sketch {
 public:
  Sketch() : radii_{0} {}
  /// Validates the plans (sources precede targets, no point ever drops to
  /// zero multiplicity, radii nonincreasing); throws ValidationError.
  explicit Sketch(GreedyResult g);

  static Sketch build(const Diagram& d, StopRule stop = StopRule::full());

  /// Number of points in the sketch.
  std::size_t size() const noexcept { return order_.size(); }
  /// True when the last prefix reproduces the source diagram exactly.
  bool complete() const noexcept { return radii_.back() == 0; }

  std::span<const Point> order() const noexcept { return order_; }
  std::span<const Length> radii() const noexcept { return radii_; }
  std::span<const TransportationPlan> plans() const noexcept { return plans_; }

  /// Mass that has left the diagonal by the end of the sketch. Equals the
  /// total multiplicity of the source diagram for complete sketches.
  Mass source_total_mass() const noexcept { return total_mass_; }

  /// D_i in greedy order with its natural reweighting. D_0 is empty.
  Diagram reconstruct(std::size_t i) const;

  /// Multiplicities of D_i in greedy order, without building a Diagram.
  std::vector<Mass> multiplicities(std::size_t i) const;

  /// Bottleneck (= Hausdorff) distance between D_i and the source diagram.
  Length error_at(std::size_t i) const;

  /// Smallest i with error_at(i) <= eps. Throws PrecisionUnreachable when a
  /// partial sketch stops short of eps.
  std::size_t min_index_for_error(Length eps) const;

  /// Total number of (source, mass) pairs over all plans.
  std::size_t entry_count() const noexcept;
  /// Largest number of sources of a single plan.
  std::size_t max_fanin() const noexcept;

  GreedyResult greedy() const { return {order_, radii_, plans_}; }

  friend bool operator==(const Sketch&, const Sketch&) = default;

 private:
  std::vector<Point> order_;
  std::vector<Length> radii_;
  std::vector<TransportationPlan> plans_;
  Mass total_mass_ = 0;
};

/// Text format:
///   pdsketch v1 n=<count>
///   <i> <birth> <death> <eps_i>        (n lines)
///   <i> <- <j|diag> <mass>              (one line per plan source)
///   eps_n <eps of the full prefix>
void write_sketch(std::ostream& out, const Sketch& s);
Sketch read_sketch(std::istream& in);
Sketch read_sketch(const std::string& text);

/// True if the text starts with the sketch header.
bool is_sketch_text(const std::string& first_line);

}  // namespace pdsketch
