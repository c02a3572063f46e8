#pragma once

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "milu/dense.hpp"
#include "milu/graph_system.hpp"
#include "milu/ordering.hpp"

namespace milu {

/// MILU factorization M = (L + E) E^{-1} (L + E)^T of an ordered SPD M-system,
/// where L is the precursor part of A and the diagonal E is chosen so that
/// R = M - A has zero row sums:
///
///   e_K = A(K,K) - sum_{K1 in p(K)} c(K,K1) * S(K1) / e_K1,
///   S(K) = sum_{K2 in s(K)} c(K,K2).
///
/// Vectors are indexed by vertex id. The factorization is immutable and
/// apply_inverse may be called concurrently.
class MiluFactorization {
 public:
  const VertexOrdering& ordering() const noexcept { return ordering_; }
  Index size() const noexcept { return ordering_.size(); }
  std::span<const double> e() const noexcept { return e_; }
  std::span<const double> successor_weight_sum() const noexcept { return successor_sum_; }

  /// Solves M z = r by forward substitution with (L+E), scaling by E, and
  /// back substitution with (L+E)^T.
  std::vector<double> apply_inverse(std::span<const double> r) const;
  /// Forward product M v.
  std::vector<double> apply(std::span<const double> v) const;
  DenseMatrix densify() const;

  friend MiluFactorization milu_factor(const SpdMSystem& a, const VertexOrdering& ord);

 private:
  VertexOrdering ordering_;
  std::vector<double> e_;
  std::vector<double> successor_sum_;
  // Precursor lists in position space: for position i, entries
  // [lower_ptr_[i], lower_ptr_[i+1]) hold (position j < i, weight c).
  std::vector<std::size_t> lower_ptr_;
  std::vector<Index> lower_pos_;
  std::vector<double> lower_w_;
};

/// Throws NonPositivePivot if a divisor e_K1 is not positive or if
/// e_K < 1e-14 A(K,K) for a vertex with successors.
MiluFactorization milu_factor(const SpdMSystem& a, const VertexOrdering& ord);

/// Checks dimensions of `a` against the factorization, then applies M^{-1}.
std::vector<double> milu_apply_inverse(const MiluFactorization& f, const SpdMSystem& a,
                                       std::span<const double> r);

/// Row sums of R = M - A. Uses the dense M for n <= 200, otherwise
/// M*1 - A*1 through the sparse factors.
std::vector<double> residual_rowsums(const SpdMSystem& a, const MiluFactorization& f);

/// e-vector as a JSON array (debugging / regression snapshots).
nlohmann::json e_vector_to_json(const MiluFactorization& f);

/// Zero fill-in incomplete LU on A's sparsity, eliminated in the given order.
/// Dropped fill is discarded rather than lumped.
class Ilu0Factorization {
 public:
  Index size() const noexcept { return ordering_.size(); }
  const VertexOrdering& ordering() const noexcept { return ordering_; }
  std::vector<double> apply_inverse(std::span<const double> r) const;
  std::vector<double> apply(std::span<const double> v) const;
  DenseMatrix densify() const;

  friend Ilu0Factorization ilu0_factor(const SpdMSystem& a, const VertexOrdering& ord);

 private:
  VertexOrdering ordering_;
  // Permuted CSR holding strict-lower L (unit diagonal implied) and U.
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> cols_;
  std::vector<double> vals_;
  std::vector<std::size_t> diag_pos_;
};

Ilu0Factorization ilu0_factor(const SpdMSystem& a, const VertexOrdering& ord);

enum class PreconditionerKind { Identity, Jacobi, Ilu0, Milu };

const char* to_string(PreconditionerKind kind);
PreconditionerKind preconditioner_kind_from_string(const std::string& name);

/// Type-erased preconditioner operator P with apply_inverse (P^{-1} r) and
/// forward apply (P v).
class Preconditioner {
 public:
  static Preconditioner identity(Index n);
  static Preconditioner jacobi(const SpdMSystem& a);
  static Preconditioner ilu0(const SpdMSystem& a, const VertexOrdering& ord);
  static Preconditioner milu(const SpdMSystem& a, const VertexOrdering& ord);
  static Preconditioner make(PreconditionerKind kind, const SpdMSystem& a, const VertexOrdering& ord);

  PreconditionerKind kind() const noexcept;
  Index size() const noexcept { return n_; }

  std::vector<double> apply_inverse(std::span<const double> r) const;
  std::vector<double> apply(std::span<const double> v) const;
  DenseMatrix densify() const;

  /// Null unless kind() == Milu.
  const MiluFactorization* milu_factorization() const noexcept;

 private:
  struct IdentityOp {};
  struct JacobiOp {
    std::vector<double> diagonal;
  };
  using Impl = std::variant<IdentityOp, JacobiOp, std::shared_ptr<const Ilu0Factorization>,
                            std::shared_ptr<const MiluFactorization>>;

  Preconditioner(Index n, Impl impl) : n_(n), impl_(std::move(impl)) {}

  Index n_ = 0;
  Impl impl_;
};

}  // namespace milu
