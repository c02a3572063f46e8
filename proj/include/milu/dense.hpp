#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace milu {

/// Row-major square matrix used only by the small-system oracles.
class DenseMatrix {
 public:
  static constexpr std::size_t kMaxOracleSize = 200;

  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  std::vector<double> multiply(std::span<const double> v) const;
  DenseMatrix multiply(const DenseMatrix& other) const;
  DenseMatrix transpose() const;
  double max_abs() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Lower-triangular Cholesky factor; throws NotPositiveDefinite.
DenseMatrix cholesky(const DenseMatrix& a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a, double tol = 1e-14,
                                          int max_sweeps = 100);

/// Solves a x = b for SPD a through its Cholesky factor.
std::vector<double> cholesky_solve(const DenseMatrix& a, std::span<const double> b);

}  // namespace milu
