#include "milu/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "milu/error.hpp"

namespace milu {

namespace {

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void check_sizes(const SpdMSystem& a, const Preconditioner& p) {
  if (p.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "preconditioner size differs from the system");
  }
}

Index resolve_max_iter(Index requested, Index n) {
  return requested > 0 ? requested : std::max<Index>(50 * n, 10);
}

double quotient(const SpdMSystem& a, const Preconditioner& p, std::span<const double> v) {
  const auto av = a.matvec(v);
  const auto pv = p.apply(v);
  return dot(av, v) / dot(pv, v);
}

void normalize(std::vector<double>& v) {
  const double s = norm(v);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw Error(ErrorCode::InvalidSystem, "iteration vector vanished or overflowed");
  }
  for (auto& x : v) x /= s;
}

}  // namespace

SolveReport pcg(const SpdMSystem& a, std::span<const double> rhs, const Preconditioner& p,
                const PcgOptions& options) {
  check_sizes(a, p);
  const Index n = a.size();
  if (static_cast<Index>(rhs.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side size differs from the system");
  }
  const Index max_iter = resolve_max_iter(options.max_iter, n);
  SolveReport rep;
  rep.solution.assign(n, 0.0);
  const double bnorm = norm(rhs);
  rep.residual_history.push_back(bnorm > 0.0 ? 1.0 : 0.0);
  if (options.on_iterate) options.on_iterate(0, rep.solution);
  if (bnorm == 0.0) {
    rep.converged = true;
    return rep;
  }
  std::vector<double> r(rhs.begin(), rhs.end());
  auto z = p.apply_inverse(r);
  double rz = dot(r, z);
  if (rz < 0.0) throw Error(ErrorCode::IndefinitePreconditioner, "<z, r> < 0 at iteration 0");
  std::vector<double> d = z;
  std::vector<double> ad(n);
  auto& x = rep.solution;
  for (Index k = 1; k <= max_iter; ++k) {
    a.matvec(d, ad);
    const double dad = dot(d, ad);
    if (!(dad > 0.0)) {
      throw Error(ErrorCode::InvalidSystem, "non-positive curvature: A is not positive definite",
                  "iteration " + std::to_string(k));
    }
    const double alpha = rz / dad;
    for (Index i = 0; i < n; ++i) {
      x[i] += alpha * d[i];
      r[i] -= alpha * ad[i];
    }
    const double rel = norm(r) / bnorm;
    rep.residual_history.push_back(rel);
    rep.iterations = k;
    if (options.on_iterate) options.on_iterate(k, x);
    if (rel <= options.tol) {
      rep.converged = true;
      return rep;
    }
    z = p.apply_inverse(r);
    const double rz_next = dot(r, z);
    if (rz_next < 0.0) {
      throw Error(ErrorCode::IndefinitePreconditioner, "<z, r> < 0",
                  "iteration " + std::to_string(k));
    }
    const double beta = rz_next / rz;
    rz = rz_next;
    for (Index i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
  }
  if (options.throw_on_max_iter) {
    throw Error(ErrorCode::MaxIterations, "PCG did not reach the tolerance",
                "relative residual " + std::to_string(rep.residual_history.back()));
  }
  return rep;
}

std::vector<double> start_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> v(n);
  for (auto& x : v) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    x = 1.0 + 0.5 * (2.0 * u - 1.0);
  }
  return v;
}

EigenEstimate lambda_max_power(const SpdMSystem& a, const Preconditioner& p,
                               const EigenOptions& options) {
  check_sizes(a, p);
  const Index n = a.size();
  const Index max_iter = resolve_max_iter(options.max_iter, n);
  auto v = start_vector(n, options.seed);
  normalize(v);
  EigenEstimate est;
  est.value = quotient(a, p, v);
  for (Index k = 1; k <= max_iter; ++k) {
    v = p.apply_inverse(a.matvec(v));
    normalize(v);
    const double next = quotient(a, p, v);
    est.last_change = std::abs(next - est.value) / std::abs(next);
    est.value = next;
    est.iterations = k;
    if (k >= options.min_iter && est.last_change <= options.tol) {
      est.converged = true;
      return est;
    }
  }
  if (options.throw_on_max_iter) {
    throw Error(ErrorCode::MaxIterations, "power iteration did not converge");
  }
  return est;
}

EigenEstimate lambda_min_inverse(const SpdMSystem& a, const Preconditioner& p,
                                 const EigenOptions& options) {
  check_sizes(a, p);
  const Index n = a.size();
  const Index max_iter = resolve_max_iter(options.max_iter, n);
  const Preconditioner& inner = options.inner ? *options.inner : p;
  PcgOptions inner_opts;
  inner_opts.tol = 0.01 * options.tol;
  auto v = start_vector(n, options.seed);
  normalize(v);
  EigenEstimate est;
  est.value = quotient(a, p, v);
  for (Index k = 1; k <= max_iter; ++k) {
    const auto pv = p.apply(v);
    auto solve = pcg(a, pv, inner, inner_opts);
    if (!solve.converged) {
      throw Error(ErrorCode::InnerSolveFailure, "inner PCG solve did not converge",
                  "outer iteration " + std::to_string(k));
    }
    v = std::move(solve.solution);
    normalize(v);
    const double next = quotient(a, p, v);
    est.last_change = std::abs(next - est.value) / std::abs(next);
    est.value = next;
    est.iterations = k;
    if (k >= options.min_iter && est.last_change <= options.tol) {
      est.converged = true;
      return est;
    }
  }
  if (options.throw_on_max_iter) {
    throw Error(ErrorCode::MaxIterations, "inverse iteration did not converge");
  }
  return est;
}

SpectralEstimate condition_number(const SpdMSystem& a, const Preconditioner& p,
                                  const EigenOptions& options) {
  SpectralEstimate s;
  s.lambda_max = lambda_max_power(a, p, options);
  s.lambda_min = lambda_min_inverse(a, p, options);
  if (!(s.lambda_min.value > 0.0)) {
    throw Error(ErrorCode::InvalidSystem, "estimated smallest eigenvalue is not positive");
  }
  s.kappa = s.lambda_max.value / s.lambda_min.value;
  return s;
}

std::vector<double> dense_eigen_oracle(const DenseMatrix& a, const DenseMatrix& m) {
  const std::size_t n = a.size();
  if (m.size() != n) throw Error(ErrorCode::DimensionMismatch, "oracle matrices differ in size");
  if (n > DenseMatrix::kMaxOracleSize) {
    throw Error(ErrorCode::OracleSizeExceeded, "dense oracle limited to n <= 200",
                std::to_string(n));
  }
  const DenseMatrix l = cholesky(m);
  // Columnwise forward solve: returns L^{-1} B.
  auto lower_solve = [&](const DenseMatrix& b) {
    DenseMatrix x(n);
    for (std::size_t col = 0; col < n; ++col)
      for (std::size_t i = 0; i < n; ++i) {
        double s = b(i, col);
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, col);
        x(i, col) = s / l(i, i);
      }
    return x;
  };
  const DenseMatrix c = lower_solve(lower_solve(a).transpose());
  return symmetric_eigenvalues(c);
}

nlohmann::json to_json(const SolveReport& r, bool include_solution) {
  nlohmann::json j{{"iterations", r.iterations},
                   {"converged", r.converged},
                   {"residual_history", r.residual_history}};
  if (include_solution) j["solution"] = r.solution;
  return j;
}

nlohmann::json to_json(const EigenEstimate& e) {
  return {{"value", e.value},
          {"iterations", e.iterations},
          {"converged", e.converged},
          {"last_change", e.last_change}};
}

nlohmann::json to_json(const SpectralEstimate& s) {
  return {{"lambda_max", to_json(s.lambda_max)},
          {"lambda_min", to_json(s.lambda_min)},
          {"kappa", s.kappa}};
}

void write_residual_csv(std::ostream& out, const SolveReport& r) {
  out << "iteration,relative_residual\n";
  char buf[64];
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", r.residual_history[k]);
    out << k << ',' << buf << '\n';
  }
}

}  // namespace milu
