#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "milu/dense.hpp"

namespace milu {

using Index = std::int32_t;

/// One undirected edge {a, b} with off-diagonal weight c = -A(a,b) > 0.
struct WeightedEdge {
  Index a = 0;
  Index b = 0;
  double weight = 0.0;
};

/// SPD M-matrix stored as a weighted graph: positive edge weights c and a
/// nonnegative per-vertex slack b, with A(K,K) = sum_K' c(K,K') + b(K) and
/// A(K,K') = -c(K,K'). Adjacency rows are sorted by neighbor id.
///
/// Instances are immutable once assembled.
class SpdMSystem {
 public:
  SpdMSystem() = default;

  /// Builds the symmetric closure of `edges`. An edge may be listed in either
  /// orientation or both; repeating it with a different weight is an
  /// AsymmetricInput error. Zero weights are dropped.
  static SpdMSystem assemble(Index n, std::span<const WeightedEdge> edges,
                             std::span<const double> slack);

  Index size() const noexcept { return static_cast<Index>(slack_.size()); }
  std::size_t num_edges() const noexcept { return cols_.size() / 2; }

  std::span<const Index> neighbors(Index k) const {
    return {cols_.data() + row_ptr_[k], cols_.data() + row_ptr_[k + 1]};
  }
  std::span<const double> weights(Index k) const {
    return {weights_.data() + row_ptr_[k], weights_.data() + row_ptr_[k + 1]};
  }
  std::size_t degree(Index k) const { return row_ptr_[k + 1] - row_ptr_[k]; }

  double slack(Index k) const { return slack_[k]; }
  std::span<const double> slack() const noexcept { return slack_; }
  /// Sum of incident weights plus slack, accumulated in adjacency order.
  double diagonal(Index k) const { return diagonal_[k]; }
  std::span<const double> diagonal() const noexcept { return diagonal_; }
  double max_diagonal() const;

  /// -c(a,b) when {a,b} is an edge, the diagonal when a == b, zero otherwise.
  double entry(Index a, Index b) const;

  std::vector<double> matvec(std::span<const double> v) const;
  void matvec(std::span<const double> v, std::span<double> out) const;

  /// Edge list with a < b, ordered by (a, b).
  std::vector<WeightedEdge> edges() const;

 private:
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> weights_;
  std::vector<double> slack_;
  std::vector<double> diagonal_;
};

struct SystemDiagnostics {
  bool symmetric = true;
  bool signs_ok = true;
  bool has_positive_slack = false;
  Index num_components = 0;
  Index components_without_slack = 0;
  std::vector<std::string> failures;

  bool connected() const { return num_components <= 1; }
  bool ok() const { return failures.empty(); }
};

/// Checks the structural invariants and the per-component positivity
/// prerequisite. Never throws.
SystemDiagnostics validate(const SpdMSystem& a);

/// Dense copy for oracle use; throws OracleSizeExceeded beyond 200 vertices.
DenseMatrix densify(const SpdMSystem& a);

}  // namespace milu
