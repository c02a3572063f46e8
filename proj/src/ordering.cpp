#include "milu/ordering.hpp"

#include <algorithm>
#include <numeric>

#include "milu/error.hpp"

namespace milu {

namespace {

bool is_permutation_of_iota(std::span<const Index> v) {
  std::vector<char> seen(v.size(), 0);
  for (Index x : v) {
    if (x < 0 || static_cast<std::size_t>(x) >= v.size() || seen[x]) return false;
    seen[x] = 1;
  }
  return true;
}

std::string point_str(const GridPoint& p) {
  return "(" + std::to_string(p[0]) + "," + std::to_string(p[1]) + "," + std::to_string(p[2]) + ")";
}

template <class Key>
VertexOrdering order_by_key(std::span<const GridPoint> coords, Key key) {
  std::vector<Index> seq(coords.size());
  std::iota(seq.begin(), seq.end(), 0);
  std::sort(seq.begin(), seq.end(), [&](Index a, Index b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (coords[seq[i - 1]] == coords[seq[i]]) {
      throw Error(ErrorCode::DuplicateCoordinates, "two vertices share grid coordinates",
                  point_str(coords[seq[i]]));
    }
  }
  return VertexOrdering::from_sequence(std::move(seq));
}

}  // namespace

VertexOrdering VertexOrdering::from_sequence(std::vector<Index> sequence) {
  if (!is_permutation_of_iota(sequence)) {
    throw Error(ErrorCode::InvalidArgument, "ordering sequence is not a permutation");
  }
  VertexOrdering ord;
  ord.rank_.resize(sequence.size());
  for (std::size_t pos = 0; pos < sequence.size(); ++pos) ord.rank_[sequence[pos]] = static_cast<Index>(pos);
  ord.sequence_ = std::move(sequence);
  return ord;
}

VertexOrdering VertexOrdering::from_ranks(std::vector<Index> ranks) {
  if (!is_permutation_of_iota(ranks)) {
    throw Error(ErrorCode::InvalidArgument, "rank vector is not a permutation");
  }
  VertexOrdering ord;
  ord.sequence_.resize(ranks.size());
  for (std::size_t v = 0; v < ranks.size(); ++v) ord.sequence_[ranks[v]] = static_cast<Index>(v);
  ord.rank_ = std::move(ranks);
  return ord;
}

VertexOrdering VertexOrdering::identity(Index n) {
  std::vector<Index> seq(n);
  std::iota(seq.begin(), seq.end(), 0);
  return from_sequence(std::move(seq));
}

VertexOrdering lexicographic_order(std::span<const GridPoint> coords) {
  return order_by_key(coords, [&](Index v) {
    const auto& p = coords[v];
    return std::array<int, 3>{p[2], p[1], p[0]};
  });
}

VertexOrdering sector_order(std::span<const GridPoint> coords, const GridPoint& extents) {
  for (int ax = 0; ax < 3; ++ax) {
    if (extents[ax] < 1) {
      throw Error(ErrorCode::NonRectangularGrid, "grid extents must be positive on every axis");
    }
  }
  for (const auto& p : coords) {
    for (int ax = 0; ax < 3; ++ax) {
      if (p[ax] < 0 || p[ax] >= extents[ax]) {
        throw Error(ErrorCode::NonRectangularGrid, "coordinate outside the grid box", point_str(p));
      }
    }
  }
  return order_by_key(coords, [&](Index v) {
    const auto& p = coords[v];
    int sector = 0;
    std::array<int, 3> local{};
    for (int ax = 0; ax < 3; ++ax) {
      const int lower_count = (extents[ax] + 1) / 2;
      const bool upper = p[ax] >= lower_count;
      if (upper) sector |= 1 << ax;
      local[ax] = upper ? extents[ax] - 1 - p[ax] : p[ax];
    }
    return std::array<int, 4>{sector, local[2], local[1], local[0]};
  });
}

NeighborPartition partition(const SpdMSystem& a, const VertexOrdering& ord, Index k) {
  NeighborPartition part;
  for (Index nb : a.neighbors(k)) {
    (ord.precedes(nb, k) ? part.precursors : part.successors).push_back(nb);
  }
  return part;
}

OrderingDiagnostics validate_ordering(const SpdMSystem& a, const VertexOrdering& ord) {
  OrderingDiagnostics d;
  if (ord.size() != a.size()) {
    d.size_matches = false;
    d.failures.push_back("ordering covers " + std::to_string(ord.size()) + " vertices, system has " +
                         std::to_string(a.size()));
    return d;
  }
  if (!is_permutation_of_iota(ord.ranks()) || !is_permutation_of_iota(ord.sequence())) {
    d.bijective = false;
    d.failures.push_back("ordering is not a bijection");
    return d;
  }
  for (Index k = 0; k < a.size(); ++k) {
    if (a.slack(k) > 0.0 || a.degree(k) == 0) continue;
    bool has_precursor = false;
    for (Index nb : a.neighbors(k)) has_precursor |= ord.precedes(nb, k);
    if (!has_precursor) d.sourceless_without_slack.push_back(k);
  }
  return d;
}

nlohmann::json ordering_to_json(const VertexOrdering& ord) {
  return std::vector<Index>(ord.sequence().begin(), ord.sequence().end());
}

VertexOrdering ordering_from_json(const nlohmann::json& j) {
  try {
    return VertexOrdering::from_sequence(j.get<std::vector<Index>>());
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedFile, std::string("ordering JSON: ") + ex.what());
  }
}

}  // namespace milu
