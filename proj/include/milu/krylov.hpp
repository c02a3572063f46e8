#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "milu/dense.hpp"
#include "milu/graph_system.hpp"
#include "milu/preconditioners.hpp"

namespace milu {

struct SolveReport {
  std::vector<double> solution;
  Index iterations = 0;
  /// ||b - A x_k|| / ||b|| for k = 0..iterations, from the CG recurrence.
  std::vector<double> residual_history;
  bool converged = false;
};

struct PcgOptions {
  double tol = 1e-14;
  /// 0 selects 50 n.
  Index max_iter = 0;
  bool throw_on_max_iter = false;
  /// Called with (k, x_k) after every iterate, including k = 0.
  std::function<void(Index, std::span<const double>)> on_iterate;
};

/// Preconditioned conjugate gradient from x0 = 0. Throws
/// IndefinitePreconditioner when <z, r> < 0 and, with throw_on_max_iter,
/// MaxIterations.
SolveReport pcg(const SpdMSystem& a, std::span<const double> rhs, const Preconditioner& p,
                const PcgOptions& options = {});

struct EigenOptions {
  double tol = 1e-6;
  /// 0 selects 50 n.
  Index max_iter = 0;
  Index min_iter = 10;
  std::uint64_t seed = 20240607;
  bool throw_on_max_iter = false;
  /// Preconditioner for the inner solves of inverse iteration; defaults to P.
  const Preconditioner* inner = nullptr;
};

struct EigenEstimate {
  double value = 0.0;
  Index iterations = 0;
  bool converged = false;
  /// Relative change of the Rayleigh quotient in the last step.
  double last_change = 0.0;
};

/// Power iteration on v -> P^{-1} A v with quotient <Av,v>/<Pv,v>.
EigenEstimate lambda_max_power(const SpdMSystem& a, const Preconditioner& p,
                               const EigenOptions& options = {});

/// Inverse iteration: solve A x = P v by PCG (tolerance 0.01 tol), same quotient.
/// Throws InnerSolveFailure when an inner solve does not converge.
EigenEstimate lambda_min_inverse(const SpdMSystem& a, const Preconditioner& p,
                                 const EigenOptions& options = {});

struct SpectralEstimate {
  EigenEstimate lambda_max;
  EigenEstimate lambda_min;
  double kappa = 0.0;
};

SpectralEstimate condition_number(const SpdMSystem& a, const Preconditioner& p,
                                  const EigenOptions& options = {});

/// Generalized eigenvalues of (A, M), ascending, through Cholesky of M and
/// Jacobi on L^{-1} A L^{-T}. Throws NotPositiveDefinite, OracleSizeExceeded.
std::vector<double> dense_eigen_oracle(const DenseMatrix& a, const DenseMatrix& m);

/// Deterministic start vector 1 + 0.5 u with u uniform in [-1, 1].
std::vector<double> start_vector(Index n, std::uint64_t seed);

nlohmann::json to_json(const SolveReport& r, bool include_solution = false);
nlohmann::json to_json(const EigenEstimate& e);
nlohmann::json to_json(const SpectralEstimate& s);
/// CSV `iteration,relative_residual`.
void write_residual_csv(std::ostream& out, const SolveReport& r);

}  // namespace milu
