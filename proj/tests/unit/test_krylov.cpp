#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "milu/dense.hpp"
#include "milu/error.hpp"
#include "milu/experiment.hpp"
#include "milu/krylov.hpp"
#include "random_systems.hpp"

using namespace milu;

namespace {

EigenOptions tight() {
  EigenOptions o;
  o.tol = 1e-12;
  o.max_iter = 200000;
  return o;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Pcg, IdentityMatrixConvergesInOneStep) {
  const std::vector<double> b(7, 1.0);
  const auto a = SpdMSystem::assemble(7, {}, b);
  const std::vector<double> rhs{1, 2, 3, 4, 5, 6, 7};
  const auto rep = pcg(a, rhs, Preconditioner::identity(7));
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_NEAR(rep.solution[6], 7.0, 1e-14);
  ASSERT_EQ(rep.residual_history.size(), 2u);
  EXPECT_EQ(rep.residual_history[0], 1.0);
}

TEST(Pcg, FiniteTermination) {
  std::mt19937_64 gen(61);
  const auto a = fixtures::random_system(gen, 30, 0.15);
  const auto rhs = random_rhs(30, 5);
  const auto rep = pcg(a, rhs, Preconditioner::identity(30));
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 35);
  EXPECT_LE(rep.residual_history.back(), 1e-14);
  const auto x = cholesky_solve(densify(a), rhs);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(rep.solution[i], x[i], 1e-10 * std::abs(x[i]) + 1e-12);
}

TEST(Pcg, ZeroRhs) {
  std::mt19937_64 gen(2);
  const auto a = fixtures::random_system(gen, 5);
  const std::vector<double> zero(5, 0.0);
  const auto rep = pcg(a, zero, Preconditioner::jacobi(a));
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 0);
}

TEST(Pcg, MaxIterations) {
  std::mt19937_64 gen(3);
  const auto a = fixtures::random_system(gen, 50, 0.1);
  const auto rhs = random_rhs(50, 1);
  PcgOptions o;
  o.max_iter = 2;
  EXPECT_FALSE(pcg(a, rhs, Preconditioner::identity(50), o).converged);
  o.throw_on_max_iter = true;
  try {
    pcg(a, rhs, Preconditioner::identity(50), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MaxIterations);
  }
}

TEST(Pcg, EnergyNormErrorNeverIncreases) {
  std::mt19937_64 gen(71);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 20 + static_cast<Index>(gen() % 150);
    const auto rc = fixtures::random_case(gen, n, 0.05);
    const auto& a = rc.system;
    const auto& ord = rc.ordering;
    const auto rhs = random_rhs(n, trial);
    const auto exact = cholesky_solve(densify(a), rhs);
    for (auto kind : {PreconditionerKind::Identity, PreconditionerKind::Jacobi, PreconditionerKind::Ilu0,
                      PreconditionerKind::Milu}) {
      std::vector<double> energy;
      PcgOptions o;
      o.on_iterate = [&](Index, std::span<const double> x) {
        std::vector<double> e(n);
        for (Index i = 0; i < n; ++i) e[i] = x[i] - exact[i];
        const auto ae = a.matvec(e);
        double s = 0.0;
        for (Index i = 0; i < n; ++i) s += e[i] * ae[i];
        energy.push_back(std::sqrt(std::max(s, 0.0)));
      };
      const auto rep = pcg(a, rhs, Preconditioner::make(kind, a, ord), o);
      EXPECT_TRUE(rep.converged);
      for (std::size_t k = 1; k < energy.size(); ++k)
        EXPECT_LE(energy[k], energy[k - 1] * (1.0 + 1e-9) + 1e-12 * energy[0]) << to_string(kind);
    }
  }
}

TEST(PcgComparison, QuadtreeExample2) {
  ExperimentConfig c;
  c.builder = Builder::QuadtreeFvm;
  c.ordering = OrderingChoice::Tree;
  c.sigma = "example2";
  c.seed = 21;
  const auto built = build_system(c, {"5", 5});
  const auto rhs = random_rhs(built.system.size(), 21);
  Index iters[3];
  int i = 0;
  for (auto kind : {PreconditionerKind::Milu, PreconditionerKind::Ilu0, PreconditionerKind::Jacobi}) {
    iters[i++] = pcg(built.system, rhs, Preconditioner::make(kind, built.system, built.ordering)).iterations;
  }
  EXPECT_LT(iters[0], iters[1]);
  EXPECT_LT(iters[1], iters[2]);
}

TEST(Spectrum, DiagonalSystem) {
  const std::vector<double> b{1.0, 4.0};
  const auto a = SpdMSystem::assemble(2, {}, b);
  const auto s = condition_number(a, Preconditioner::identity(2), tight());
  EXPECT_NEAR(s.kappa, 4.0, 1e-9);
}

TEST(Spectrum, PathGraphClosedForm) {
  const Index n = 20;
  std::vector<WeightedEdge> e;
  for (Index k = 0; k + 1 < n; ++k) e.push_back({k, k + 1, 1.0});
  std::vector<double> b(n, 0.0);
  b.front() = b.back() = 1.0;
  const auto a = SpdMSystem::assemble(n, e, b);
  auto lam = [&](int k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * (n + 1)));
    return 4.0 * s * s;
  };
  const auto s = condition_number(a, Preconditioner::identity(n), tight());
  EXPECT_LT(rel(s.kappa, lam(n) / lam(1)), 1e-6);
  EXPECT_LT(rel(s.lambda_min.value, lam(1)), 1e-6);
}

TEST(Spectrum, AgreesWithDenseOracle) {
  std::mt19937_64 gen(83);
  for (int trial = 0; trial < 15; ++trial) {
    const Index n = 5 + static_cast<Index>(gen() % 95);
    const auto rc = fixtures::random_case(gen, n, 0.06);
    const auto& a = rc.system;
    const auto& ord = rc.ordering;
    for (auto kind : {PreconditionerKind::Identity, PreconditionerKind::Milu}) {
      const auto p = Preconditioner::make(kind, a, ord);
      const auto est = condition_number(a, p, tight());
      const auto eig = dense_eigen_oracle(densify(a), p.densify());
      EXPECT_LT(rel(est.kappa, eig.back() / eig.front()), 1e-6) << "n=" << n << " " << to_string(kind);
      if (kind == PreconditionerKind::Milu) {
        EXPECT_GE(est.lambda_min.value, 1.0 - 1e-8);
        EXPECT_GE(eig.front(), 1.0 - 1e-8);
      }
    }
  }
}

TEST(Spectrum, MiluFloorWithDefaultTolerance) {
  std::mt19937_64 gen(89);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 5 + static_cast<Index>(gen() % 95);
    const auto rc = fixtures::random_case(gen, n, 0.06);
    const auto& a = rc.system;
    const auto& ord = rc.ordering;
    const auto p = Preconditioner::milu(a, ord);
    const auto lmin = lambda_min_inverse(a, p);
    EXPECT_GE(lmin.value, 1.0 - 1e-8);
  }
}

TEST(Spectrum, OracleGuards) {
  DenseMatrix a(201), m(201);
  EXPECT_THROW(dense_eigen_oracle(a, m), Error);
  DenseMatrix x(2), y(2);
  x(0, 0) = x(1, 1) = 1.0;
  y(0, 0) = 1.0;
  y(1, 1) = -1.0;
  try {
    dense_eigen_oracle(x, y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(Serialization, JsonAndCsv) {
  const std::vector<double> b{1.0, 4.0};
  const auto a = SpdMSystem::assemble(2, {}, b);
  const std::vector<double> rhs{1.0, 1.0};
  const auto rep = pcg(a, rhs, Preconditioner::identity(2));
  const auto j = to_json(rep, true);
  EXPECT_EQ(j.at("iterations").get<int>(), rep.iterations);
  EXPECT_TRUE(j.contains("solution"));
  std::ostringstream csv;
  write_residual_csv(csv, rep);
  EXPECT_EQ(csv.str().rfind("iteration,relative_residual\n0,1\n", 0), 0u);
  const auto s = condition_number(a, Preconditioner::identity(2), tight());
  EXPECT_NEAR(to_json(s).at("kappa").get<double>(), 4.0, 1e-9);
}
