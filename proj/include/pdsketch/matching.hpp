#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pdsketch/diagram.hpp"
#include "pdsketch/greedy.hpp"

namespace pdsketch {

class Sketch;

/// Integer transportation plan between two diagrams A (rows) and B (columns).
/// Indices refer to diagram entries; kDiagonal is the diagonal on either side.
/// Diagonal-to-diagonal mass is never stored.
class Transport {
 public:
  struct Entry {
    Index a;
    Index b;
    Mass mass;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  void add(Index a, Index b, Mass m);
  /// Removes the (a, b) entry and returns its mass.
  Mass remove(Index a, Index b);
  Mass at(Index a, Index b) const;

  /// Row -> mass map of column b, or nullptr if the column is empty.
  const std::map<Index, Mass>* column(Index b) const;

  /// All entries sorted by (a, b).
  std::vector<Entry> entries() const;
  std::size_t size() const noexcept;
  bool empty() const noexcept { return cols_.empty(); }

  friend bool operator==(const Transport&, const Transport&) = default;

 private:
  std::map<Index, std::map<Index, Mass>> cols_;
};

/// Row sums must match A's multiplicities and column sums B's; throws ValidationError.
void validate(const Transport& t, const Diagram& a, const Diagram& b);

/// Length of the (a, b) edge; an edge to the diagonal goes to the projection.
Length edge_length(Index a, Index b, const Diagram& da, const Diagram& db);

Length cost_bottleneck(const Transport& t, const Diagram& a, const Diagram& b);
double cost_wasserstein(const Transport& t, const Diagram& a, const Diagram& b, double p);

/// Point-to-point edges (index into A, index into B) a solver may use.
using CandidateEdges = std::vector<std::pair<Index, Index>>;

struct BottleneckResult {
  Length value = 0;
  Transport transport;
};

/// Exact bottleneck distance by binary search over candidate lengths with a
/// max-flow feasibility test. Without `graph`, every A x B pair is a
/// candidate; with it only the listed pairs are (diagonal edges are always
/// candidates).
BottleneckResult exact_bottleneck(const Diagram& a, const Diagram& b,
                                  const CandidateEdges* graph = nullptr);

struct UpdateStats {
  std::uint64_t candidate_edges = 0;
  std::size_t steps = 0;
};

// Matching updates. `m` is a valid transport X -> before (= D_i), `plan` is
// T_i and `after` is D_{i+1}; before and after are sketch prefixes in greedy
// order, so their first i indices agree and index i is the new point. The
// result is a valid transport X -> after that moves exactly the planned mass
// of each source into the new point.

/// Reroutes mass arriving at each source in row order. Diagonal-sourced mass
/// is taken from X's own diagonal.
Transport naive_update(const Transport& m, const TransportationPlan& plan, const Diagram& x,
                       const Diagram& before, const Diagram& after);

/// Bottleneck-optimal replacement of the block between the affected X rows
/// and the sources plus the new point.
Transport local_update_bottleneck(const Transport& m, const TransportationPlan& plan,
                                  const Diagram& x, const Diagram& before, const Diagram& after,
                                  UpdateStats* stats = nullptr);

/// Moves the planned units in increasing order of p-th power cost change.
Transport local_update_wasserstein(const Transport& m, const TransportationPlan& plan,
                                   const Diagram& x, const Diagram& before, const Diagram& after,
                                   double p);

/// Applies local_update_bottleneck for plans i..k-1. `m` is a transport from
/// X to s.reconstruct(i); the result goes to s.reconstruct(k).
Transport batch_update(const Transport& m, const Sketch& s, const Diagram& x, std::size_t i,
                       std::size_t k, UpdateStats* stats = nullptr);

/// `aIdx|diag bIdx|diag mass` per line, sorted by (a, b).
void write_transport(std::ostream& out, const Transport& t);
Transport read_transport(std::istream& in);

}  // namespace pdsketch
