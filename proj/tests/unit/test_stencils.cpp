#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "milu/error.hpp"
#include "milu/stencils.hpp"

using namespace milu;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

Index find(const GridSystem& g, GridPoint p) {
  for (Index k = 0; k < static_cast<Index>(g.coords.size()); ++k)
    if (g.coords[k] == p) return k;
  return -1;
}

}  // namespace

TEST(Gibou, UnitSquareIsFivePointStencil) {
  const auto res = gibou_matrix(UniformGridSpec::unit(2, 4));
  const auto& g = res.grid;
  ASSERT_EQ(g.system.size(), 9);
  for (Index k = 0; k < 9; ++k) EXPECT_DOUBLE_EQ(g.system.diagonal(k), 64.0);
  const Index center = find(g, {2, 2, 0});
  const Index corner = find(g, {1, 1, 0});
  EXPECT_EQ(center, 4);
  EXPECT_DOUBLE_EQ(g.system.entry(center, find(g, {1, 2, 0})), -16.0);
  EXPECT_DOUBLE_EQ(g.system.slack(center), 0.0);
  EXPECT_DOUBLE_EQ(g.system.slack(corner), 32.0);
  EXPECT_EQ(res.boundary.cuts[corner].size(), 2u);
  for (const auto& cut : res.boundary.cuts[corner]) EXPECT_DOUBLE_EQ(cut.distance, 0.25);
}

TEST(Gibou, UnitCube) {
  const auto g = gibou_matrix(UniformGridSpec::unit(3, 4)).grid;
  ASSERT_EQ(g.system.size(), 27);
  for (Index k = 0; k < 27; ++k) EXPECT_DOUBLE_EQ(g.system.diagonal(k), 6.0 * 16.0);
  EXPECT_DOUBLE_EQ(g.system.slack(find(g, {1, 1, 1})), 3.0 * 16.0);
}

TEST(Gibou, DiskCutsMatchAnalyticIntersections) {
  auto spec = UniformGridSpec::unit(2, 20);
  spec.domain = domain_from_name("disk(0.5,0.5,0.33)", spec);
  const auto res = gibou_matrix(spec);
  const double h = spec.h;
  Index cuts = 0;
  for (Index k = 0; k < res.grid.system.size(); ++k) {
    const auto x = spec.node(res.grid.coords[k]);
    double expected_slack = 0.0;
    for (const auto& cut : res.boundary.cuts[k]) {
      // Solve |x + t e - c| = r for t > 0 along the cut direction.
      const double along = cut.side * (x[cut.axis] - 0.5);
      const double across = x[1 - cut.axis] - 0.5;
      const double t = -along + std::sqrt(along * along - (along * along + across * across - 0.33 * 0.33));
      EXPECT_NEAR(cut.distance, t, 1e-10 * h);
      EXPECT_GT(cut.distance, 0.0);
      EXPECT_LE(cut.distance, h);
      expected_slack += 1.0 / (cut.distance * h);
      ++cuts;
    }
    EXPECT_NEAR(res.grid.system.slack(k), expected_slack, 1e-9 * expected_slack + 1e-12);
  }
  EXPECT_GT(cuts, 0);
}

TEST(Gibou, BoundaryDistance) {
  const auto disk = ImplicitDomain::disk(0.5, 0.5, 0.3);
  EXPECT_NEAR(boundary_distance(disk.phi, {0.75, 0.5, 0.0}, 0, 1, 0.1), 0.05, 1e-12);
  EXPECT_NEAR(boundary_distance(disk.phi, {0.25, 0.5, 0.0}, 0, -1, 0.1), 0.05, 1e-12);
  EXPECT_EQ(code_of([&] { boundary_distance(disk.phi, {0.5, 0.5, 0.0}, 0, 1, 0.1); }),
            ErrorCode::NoSignChange);
}

TEST(Gibou, Errors) {
  auto spec = UniformGridSpec::unit(2, 8);
  spec.domain = ImplicitDomain::disk(0.5, 0.5, 0.125 + 1e-11);  // grazes node (0.625, 0.5)
  EXPECT_EQ(code_of([&] { gibou_matrix(spec); }), ErrorCode::DegenerateCut);
  spec.domain = ImplicitDomain::disk(0.51, 0.51, 0.001);
  EXPECT_EQ(code_of([&] { gibou_matrix(spec); }), ErrorCode::EmptyDomain);
  EXPECT_EQ(code_of([&] { domain_from_name("ellipse(1,2)", spec); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { domain_from_name("disk(0.5,0.5)", spec); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { UniformGridSpec::unit(4, 8); }), ErrorCode::InvalidDimension);
}

TEST(Gibou, SphereRegistry) {
  auto spec = UniformGridSpec::unit(3, 10);
  spec.domain = domain_from_name("sphere(0.5,0.5,0.5,0.37)", spec);
  const auto g = gibou_matrix(spec).grid;
  EXPECT_GT(g.system.size(), 100);
  EXPECT_TRUE(validate(g.system).ok());
}

TEST(WideStencil, WeightsAreSymmetricAndSumToZero) {
  for (auto id : {WideScheme::Ifd11, WideScheme::Ifd22, WideScheme::Hifd22}) {
    const auto s = WideStencilScheme::make(id);
    double total = 0.0;
    for (int p = -2; p <= 2; ++p)
      for (int q = -2; q <= 2; ++q) {
        EXPECT_DOUBLE_EQ(wide_stencil_weight(s, p, q), wide_stencil_weight(s, q, p));
        total += wide_stencil_weight(s, p, q);
        if (p != 0 || q != 0) EXPECT_GE(wide_stencil_weight(s, p, q), 0.0) << s.name;
      }
    EXPECT_NEAR(total, 0.0, 1e-14);
    EXPECT_LT(wide_stencil_weight(s, 0, 0), 0.0);
  }
}

TEST(WideStencil, Ifd11IsMehrstellen) {
  const auto spec = UniformGridSpec::unit(2, 9);  // n = 8 interior
  const auto g = ifd_matrix(WideStencilScheme::from_name("ifd11"), spec);
  const double s = 1.0 / (spec.h * spec.h);
  const Index k = find(g, {4, 4, 0});
  EXPECT_NEAR(g.system.diagonal(k), 10.0 / 3.0 * s, 1e-12 * s);
  EXPECT_NEAR(g.system.entry(k, find(g, {5, 4, 0})), -2.0 / 3.0 * s, 1e-12 * s);
  EXPECT_NEAR(g.system.entry(k, find(g, {5, 5, 0})), -1.0 / 6.0 * s, 1e-12 * s);
  EXPECT_EQ(g.system.entry(k, find(g, {6, 4, 0})), 0.0);
}

TEST(WideStencil, Hifd22CornerOffsetsPresent) {
  const auto spec = UniformGridSpec::unit(2, 11);
  const auto g = ifd_matrix(WideStencilScheme::from_name("hifd22"), spec);
  const Index k = find(g, {5, 5, 0});
  EXPECT_EQ(g.system.degree(k), 24u);
  EXPECT_LT(g.system.entry(k, find(g, {7, 7, 0})), 0.0);
}

// (A u)/u for u = sin(pi x) sin(pi y) equals the symbol of the stencil at
// theta = pi h away from the boundary, and tends to 2 pi^2 at second order.
TEST(WideStencil, DiscreteEigenmode) {
  using std::numbers::pi;
  for (const char* name : {"ifd11", "ifd22", "hifd22"}) {
    const auto scheme = WideStencilScheme::from_name(name);
    double previous_error = 1e300;
    for (int n : {16, 32, 64}) {
      const auto spec = UniformGridSpec::unit(2, n + 1);
      const auto g = ifd_matrix(scheme, spec);
      const double h = spec.h;
      std::vector<double> u(g.system.size());
      for (Index k = 0; k < g.system.size(); ++k)
        u[k] = std::sin(pi * g.coords[k][0] * h) * std::sin(pi * g.coords[k][1] * h);
      const auto au = g.system.matvec(u);
      const double theta = pi * h;
      const auto v = stencil_vector(scheme);
      double chat = 0.0, vhat = 0.0;
      for (int s = -2; s <= 2; ++s) {
        chat += scheme.coefficient(s) * std::cos(s * theta);
        vhat += v[s + 2] * std::cos(s * theta);
      }
      const double lambda = -(2.0 * chat * vhat) / (h * h);
      for (Index k = 0; k < g.system.size(); ++k) {
        const auto& c = g.coords[k];
        if (c[0] < 3 || c[1] < 3 || c[0] > n - 2 || c[1] > n - 2) continue;
        EXPECT_NEAR(au[k] / u[k], lambda, 1e-8 * lambda);
      }
      const double err = std::abs(lambda - 2.0 * pi * pi);
      // Second order: halving h divides the error by about four.
      if (previous_error < 1e300) EXPECT_GT(previous_error / err, 3.5);
      previous_error = err;
    }
  }
}

TEST(WideStencil, Errors) {
  const auto small = UniformGridSpec::unit(2, 5);  // n = 4 < 5
  EXPECT_EQ(code_of([&] { ifd_matrix(WideStencilScheme::from_name("ifd22"), small); }),
            ErrorCode::GridTooSmall);
  auto bad = WideStencilScheme::make(WideScheme::Ifd11);
  bad.b = 0.5;
  EXPECT_EQ(code_of([&] { ifd_matrix(bad, UniformGridSpec::unit(2, 9)); }), ErrorCode::NotAnMMatrix);
  EXPECT_EQ(code_of([&] { WideStencilScheme::from_name("ifd33"); }), ErrorCode::InvalidArgument);
  auto disk = UniformGridSpec::unit(2, 9);
  disk.domain = ImplicitDomain::disk(0.5, 0.5, 0.4);
  EXPECT_EQ(code_of([&] { ifd_matrix(WideStencilScheme::from_name("ifd11"), disk); }),
            ErrorCode::InvalidArgument);
}

TEST(WideStencil, SlackOnlyNearBoundary) {
  const auto spec = UniformGridSpec::unit(2, 13);
  const auto g = ifd_matrix(WideStencilScheme::from_name("ifd22"), spec);
  for (Index k = 0; k < g.system.size(); ++k) {
    const auto& c = g.coords[k];
    const bool near = c[0] <= 2 || c[1] <= 2 || c[0] >= 11 || c[1] >= 11;
    if (near) {
      EXPECT_GT(g.system.slack(k), 0.0);
    } else {
      EXPECT_NEAR(g.system.slack(k), 0.0, 1e-9 * g.system.diagonal(k));
    }
  }
}
