#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "milu/graph_system.hpp"

namespace milu {

/// Integer grid coordinates (x, y, z); unused trailing axes are zero.
using GridPoint = std::array<int, 3>;

/// Total order on vertices, stored both as rank (vertex -> position) and as
/// the inverse sequence (position -> vertex).
class VertexOrdering {
 public:
  VertexOrdering() = default;

  /// `sequence[pos]` is the vertex placed at `pos`; must be a permutation.
  static VertexOrdering from_sequence(std::vector<Index> sequence);
  static VertexOrdering from_ranks(std::vector<Index> ranks);
  static VertexOrdering identity(Index n);

  Index size() const noexcept { return static_cast<Index>(rank_.size()); }
  Index rank(Index v) const { return rank_[v]; }
  Index vertex_at(Index pos) const { return sequence_[pos]; }
  std::span<const Index> ranks() const noexcept { return rank_; }
  std::span<const Index> sequence() const noexcept { return sequence_; }
  bool precedes(Index a, Index b) const { return rank_[a] < rank_[b]; }

 private:
  std::vector<Index> rank_;
  std::vector<Index> sequence_;
};

/// Last-axis-major lexicographic order: compares z, then y, then x.
VertexOrdering lexicographic_order(std::span<const GridPoint> coords);

/// Sectored order. Each axis is split at its midpoint (an odd center line
/// joins the lower half); inside a sector vertices are ordered
/// lexicographically starting at the sector's outer corner and moving toward
/// the domain center; sectors follow the lexicographic order of their corner
/// coordinates. Coordinates must lie in [0, extents).
VertexOrdering sector_order(std::span<const GridPoint> coords, const GridPoint& extents);

struct NeighborPartition {
  std::vector<Index> precursors;
  std::vector<Index> successors;
};

/// Splits the neighbors of `k` into lower-ranked and higher-ranked sets.
NeighborPartition partition(const SpdMSystem& a, const VertexOrdering& ord, Index k);

struct OrderingDiagnostics {
  bool bijective = true;
  bool size_matches = true;
  /// Vertices with zero slack and no precursor: their LECN is infinite.
  std::vector<Index> sourceless_without_slack;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

OrderingDiagnostics validate_ordering(const SpdMSystem& a, const VertexOrdering& ord);

/// JSON permutation array: element `pos` holds the vertex at that position.
nlohmann::json ordering_to_json(const VertexOrdering& ord);
VertexOrdering ordering_from_json(const nlohmann::json& j);

}  // namespace milu
