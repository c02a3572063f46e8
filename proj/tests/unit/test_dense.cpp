#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "milu/dense.hpp"
#include "milu/error.hpp"

using namespace milu;

TEST(Dense, JacobiMatchesClosedFormPathSpectrum) {
  // Dirichlet 1D Laplacian tridiag(-1, 2, -1): eigenvalues 4 sin^2(k pi / (2(n+1))).
  const std::size_t n = 25;
  DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 2.0;
    if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = -1.0;
  }
  const auto eig = symmetric_eigenvalues(a);
  for (std::size_t k = 1; k <= n; ++k) {
    const double s = std::sin(k * std::numbers::pi / (2.0 * (n + 1)));
    EXPECT_NEAR(eig[k - 1], 4.0 * s * s, 1e-12);
  }
}

TEST(Dense, CholeskyReconstructs) {
  DenseMatrix a(3);
  const double v[3][3] = {{4, -1, 0}, {-1, 4, -1}, {0, -1, 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = v[i][j];
  const auto l = cholesky(a);
  const auto back = l.multiply(l.transpose());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(back(i, j), a(i, j), 1e-14);
  const std::vector<double> b{1.0, 2.0, 3.0};
  const auto x = cholesky_solve(a, b);
  const auto ax = a.multiply(x);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(ax[i], b[i], 1e-14);
}

TEST(Dense, CholeskyRejectsIndefinite) {
  DenseMatrix a(2);
  a(0, 0) = 1.0;
  a(0, 1) = a(1, 0) = 2.0;
  a(1, 1) = 1.0;
  try {
    cholesky(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}
