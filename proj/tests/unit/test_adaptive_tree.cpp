#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "milu/adaptive_tree.hpp"
#include "milu/error.hpp"
#include "milu/lecn.hpp"
#include "milu/preconditioners.hpp"
#include "random_systems.hpp"

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

double leaf_volume(const AdaptiveTree& t) {
  double v = 0.0;
  for (Index i = 0; i < t.num_leaves(); ++i) v += std::pow(t.cell_length(i), t.dim());
  return v;
}

void expect_graded_partition(const AdaptiveTree& t) {
  EXPECT_NEAR(leaf_volume(t), t.domain_volume(), 1e-12 * t.domain_volume());
  for (Index i = 0; i < t.num_leaves(); ++i)
    for (const auto& nb : t.neighbors(i))
      EXPECT_LE(std::abs(t.leaf(i).level - t.leaf(nb.leaf).level), 1);
}

}  // namespace

TEST(Tree, RefineOneOfFourRoots) {
  auto t = AdaptiveTree::build_root(2, {2, 2, 1});
  EXPECT_EQ(t.num_leaves(), 4);
  t.refine({0, {1, 0, 0}});
  EXPECT_EQ(t.num_leaves(), 7);
  EXPECT_EQ(code_of([&] { t.refine({0, {1, 0, 0}}); }), ErrorCode::CellNotLeaf);
  expect_graded_partition(t);
}

TEST(Tree, CascadeRestoresGrading) {
  auto t = AdaptiveTree::build_root(2, {2, 2, 1});
  t.refine({0, {1, 0, 0}});
  // The child touching root cell (0,0) and (1,1); refining it forces both.
  t.refine({1, {2, 1, 0}});
  EXPECT_EQ(t.find_leaf({0, {0, 0, 0}}), -1);
  EXPECT_EQ(t.find_leaf({0, {1, 1, 0}}), -1);
  EXPECT_GE(t.find_leaf({0, {0, 1, 0}}), 0);
  expect_graded_partition(t);
}

TEST(Tree, OctreeRefine) {
  auto t = AdaptiveTree::build_root(3, {1, 1, 1});
  t.refine({0, {0, 0, 0}});
  EXPECT_EQ(t.num_leaves(), 8);
  for (const auto& k : t.leaves()) EXPECT_EQ(k.level, 1);
  t.uniform_refine();
  EXPECT_EQ(t.num_leaves(), 64);
  expect_graded_partition(t);
}

TEST(Tree, UniformRefineMultipliesLeaves) {
  auto t = AdaptiveTree::random_tree(2, {2, 2, 1}, 3, 0.5, 7, 0.5);
  const auto before = t.num_leaves();
  t.uniform_refine();
  EXPECT_EQ(t.num_leaves(), 4 * before);
  expect_graded_partition(t);
}

TEST(Tree, RandomTreesAreGradedAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int dim = seed % 4 == 3 ? 3 : 2;
    const auto t = AdaptiveTree::random_tree(dim, {2, 2, dim == 3 ? 2 : 1}, dim == 3 ? 3 : 5, 0.45,
                                             seed, 0.5);
    expect_graded_partition(t);
    EXPECT_TRUE(t.is_graded());
    const auto again = AdaptiveTree::random_tree(dim, {2, 2, dim == 3 ? 2 : 1}, dim == 3 ? 3 : 5,
                                                 0.45, seed, 0.5);
    EXPECT_EQ(t.to_json(), again.to_json());
  }
  EXPECT_THROW(AdaptiveTree::random_tree(2, {1, 1, 1}, 3, 1.5, 0), Error);
  EXPECT_EQ(AdaptiveTree::random_tree(2, {1, 1, 1}, 4, 0.0, 0).num_leaves(), 1);
  EXPECT_EQ(AdaptiveTree::random_tree(2, {1, 1, 1}, 3, 1.0, 0).num_leaves(), 64);
}

TEST(Tree, NeighborsOfCoarseCellAcrossTJunction) {
  auto t = AdaptiveTree::build_root(2, {2, 1, 1});
  t.refine({0, {1, 0, 0}});
  const Index coarse = t.find_leaf({0, {0, 0, 0}});
  const auto nbs = t.neighbors(coarse);
  ASSERT_EQ(nbs.size(), 2u);
  for (const auto& nb : nbs) {
    EXPECT_EQ(nb.relation, Relation::Finer);
    EXPECT_EQ(nb.axis, 0);
    EXPECT_EQ(nb.side, 1);
    EXPECT_EQ(t.leaf(nb.leaf).anchor[0], 2);
  }
  const auto fine = t.neighbors(t.find_leaf({1, {2, 1, 0}}));
  int coarser = 0;
  for (const auto& nb : fine) coarser += nb.relation == Relation::Coarser;
  EXPECT_EQ(coarser, 1);
  EXPECT_EQ(fine.size(), 3u);
  EXPECT_EQ(t.boundary_faces(coarse), 3);
}

TEST(Tree, OrderUniformMatchesLexicographic) {
  const auto t = AdaptiveTree::build_root(2, {3, 4, 1});
  const auto ord = tree_order(t);
  std::vector<GridPoint> coords;
  for (const auto& k : t.leaves())
    coords.push_back({static_cast<int>(k.anchor[0]), static_cast<int>(k.anchor[1]), 0});
  const auto lex = lexicographic_order(coords);
  for (Index i = 0; i < t.num_leaves(); ++i) EXPECT_EQ(ord.rank(i), lex.rank(i));
}

TEST(Tree, OrderAfterRefiningSecondCell) {
  auto t = AdaptiveTree::build_root(2, {2, 2, 1});
  t.refine({0, {1, 0, 0}});
  const auto ord = tree_order(t);
  std::vector<CellKey> seq;
  for (Index p = 0; p < ord.size(); ++p) seq.push_back(t.leaf(ord.vertex_at(p)));
  const std::vector<CellKey> expected{{0, {0, 0, 0}}, {1, {2, 0, 0}}, {1, {3, 0, 0}}, {1, {2, 1, 0}},
                                      {1, {3, 1, 0}}, {0, {0, 1, 0}}, {0, {1, 1, 0}}};
  EXPECT_EQ(seq, expected);
}

TEST(Tree, OrderStableUnderRefinement) {
  auto t = AdaptiveTree::random_tree(2, {2, 2, 1}, 3, 0.5, 3, 0.5);
  const auto before = tree_order(t);
  std::vector<CellKey> old_seq;
  for (Index p = 0; p < before.size(); ++p) old_seq.push_back(t.leaf(before.vertex_at(p)));
  std::mt19937_64 gen(1);
  for (int step = 0; step < 5; ++step) t.refine_leaf(static_cast<Index>(gen() % t.num_leaves()));
  const auto after = tree_order(t);
  // Surviving leaves keep their relative order.
  std::vector<CellKey> surviving;
  for (Index p = 0; p < after.size(); ++p) {
    const auto& k = t.leaf(after.vertex_at(p));
    if (std::find(old_seq.begin(), old_seq.end(), k) != old_seq.end()) surviving.push_back(k);
  }
  std::vector<CellKey> old_surviving;
  for (const auto& k : old_seq)
    if (t.find_leaf(k) >= 0) old_surviving.push_back(k);
  EXPECT_EQ(surviving, old_surviving);
  const auto a = fvm_matrix(t, scalar_field_from_name("one"));
  EXPECT_TRUE(validate_ordering(a, after).ok());
}

TEST(Tree, JsonRoundTripAndValidation) {
  const auto t = AdaptiveTree::random_tree(2, {2, 2, 1}, 4, 0.5, 11, 0.5);
  const auto j = t.to_json();
  const auto back = AdaptiveTree::from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.to_json(), j);
  auto missing = j;
  missing["leaves"].erase(0);
  EXPECT_EQ(code_of([&] { AdaptiveTree::from_json(missing); }), ErrorCode::MalformedFile);
  auto wrong_path = j;
  wrong_path["leaves"][0]["path"] = std::vector<int>{3, 3, 3, 3, 3, 3};
  EXPECT_EQ(code_of([&] { AdaptiveTree::from_json(wrong_path); }), ErrorCode::MalformedFile);
}

TEST(Fvm, UniformTreeIsFivePointStencil) {
  auto t = AdaptiveTree::build_root(2, {2, 2, 1}, 0.5);
  t.uniform_refine();
  t.uniform_refine();  // 8x8 cells
  const auto a = fvm_matrix(t, scalar_field_from_name("one"));
  for (Index i = 0; i < a.size(); ++i) {
    const auto& k = t.leaf(i);
    const int boundary = (k.anchor[0] == 0) + (k.anchor[0] == 7) + (k.anchor[1] == 0) + (k.anchor[1] == 7);
    EXPECT_EQ(a.degree(i), static_cast<std::size_t>(4 - boundary));
    EXPECT_DOUBLE_EQ(a.slack(i), 2.0 * boundary);
    for (double w : a.weights(i)) EXPECT_DOUBLE_EQ(w, 1.0);
  }
}

TEST(Fvm, UniformOctreeIsSevenPointStencil) {
  auto t = AdaptiveTree::build_root(3, {1, 1, 1}, 1.0);
  t.uniform_refine();
  t.uniform_refine();  // 4x4x4, l = 1/4
  const auto a = fvm_matrix(t, scalar_field_from_name("one"));
  for (Index i = 0; i < a.size(); ++i) {
    const int boundary = t.boundary_faces(i);
    EXPECT_EQ(a.degree(i), static_cast<std::size_t>(6 - boundary));
    EXPECT_DOUBLE_EQ(a.slack(i), 2.0 * 0.25 * boundary);
    for (double w : a.weights(i)) EXPECT_DOUBLE_EQ(w, 0.25);
  }
}

TEST(Fvm, LevelJumpWeightIsAlpha) {
  auto t = AdaptiveTree::build_root(2, {2, 1, 1}, 0.5);
  t.refine({0, {1, 0, 0}});
  const auto a = fvm_matrix(t, scalar_field_from_name("one"));
  const Index coarse = t.find_leaf({0, {0, 0, 0}});
  const Index fine = t.find_leaf({1, {2, 0, 0}});
  EXPECT_DOUBLE_EQ(a.entry(coarse, fine), -2.0 / 3.0);
  EXPECT_DOUBLE_EQ(a.entry(fine, t.find_leaf({1, {3, 0, 0}})), -1.0);
}

TEST(Fvm, VariableCoefficientWeights) {
  auto t = AdaptiveTree::build_root(2, {2, 1, 1}, 0.5);
  t.refine({0, {1, 0, 0}});
  const auto sigma = scalar_field_from_name("example2");
  const auto a = fvm_matrix(t, sigma);
  const Index coarse = t.find_leaf({0, {0, 0, 0}});
  const Index fine = t.find_leaf({1, {2, 1, 0}});
  const double sc = sigma.eval(t.center(coarse));
  const double sf = sigma.eval(t.center(fine));
  EXPECT_NEAR(-a.entry(coarse, fine), 2.0 / (1.0 / sf + 2.0 / sc), 1e-14);
  const Index right = t.find_leaf({1, {3, 1, 0}});
  const double sr = sigma.eval(t.center(right));
  EXPECT_NEAR(-a.entry(fine, right), 2.0 / (1.0 / sf + 1.0 / sr), 1e-14);
  EXPECT_NEAR(a.slack(coarse), 2.0 * 3.0 * sc, 1e-14);
}

TEST(Fvm, SymmetricMMatrixForAnyPositiveSigma) {
  for (const char* name : {"one", "example1", "example2"}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto t = AdaptiveTree::random_tree(2, {2, 2, 1}, 4, 0.5, seed, 0.5);
      const auto a = fvm_matrix(t, scalar_field_from_name(name));
      EXPECT_TRUE(validate(a).ok()) << name;
      EXPECT_TRUE(validate_ordering(a, tree_order(t)).ok());
    }
  }
  const auto t3 = AdaptiveTree::random_tree(3, {2, 2, 2}, 2, 0.5, 4, 0.5);
  EXPECT_TRUE(validate(fvm_matrix(t3, scalar_field_from_name("example1"))).ok());
}

TEST(Fvm, Errors) {
  const auto t = AdaptiveTree::build_root(2, {2, 2, 1}, 0.5);
  const ScalarField negative{"neg", [](const Point& p) { return p[0] - 0.5; }};
  EXPECT_EQ(code_of([&] { fvm_matrix(t, negative); }), ErrorCode::NonPositiveSigma);
  EXPECT_THROW(scalar_field_from_name("example3"), Error);
  // Level-2 leaves next to a level-0 leaf.
  nlohmann::json j{{"d", 2}, {"root_extents", {2, 1}}, {"root_h", 0.5}, {"leaves", nlohmann::json::array()}};
  j["leaves"].push_back({{"level", 0}, {"anchor", {0, 0}}});
  for (int y = 0; y < 4; ++y)
    for (int x = 4; x < 8; ++x) j["leaves"].push_back({{"level", 2}, {"anchor", {x, y}}});
  const auto ungraded = AdaptiveTree::from_json(j);
  EXPECT_FALSE(ungraded.is_graded());
  EXPECT_EQ(code_of([&] { fvm_matrix(ungraded, scalar_field_from_name("one")); }),
            ErrorCode::UngradedTree);
}

// tau recurrences at the T-junction between root cell C1 and the refined
// child C2 of its right neighbour.
TEST(Fvm, TJunctionRecurrences) {
  constexpr double alpha = 2.0 / 3.0;
  for (int n = 1; n <= 4; ++n) {
    const auto t = fixtures::t_junction_tree(n);
    const auto a = fvm_matrix(t, scalar_field_from_name("one"));
    const auto rep = tau_direct(a, milu_factor(a, tree_order(t)));
    const std::int64_t m = std::int64_t{1} << n;
    auto tau1 = [&](std::int64_t i1, std::int64_t i2) {
      return rep.tau[t.find_leaf({n, {i1 - 1, i2 - 1, 0}})];
    };
    auto tau2 = [&](std::int64_t i1, std::int64_t i2) {
      return rep.tau[t.find_leaf({n + 1, {2 * m + i1 - 1, i2 - 1, 0}})];
    };
    for (std::int64_t i2 = 2; i2 <= m; ++i2) {
      const double expected = 1.0 + (1.0 + 2.0 * alpha) / (1.0 / tau1(m - 1, i2) + 1.0 / tau1(m, i2 - 1));
      EXPECT_NEAR(tau1(m, i2), expected, 1e-12 * expected);
    }
    for (std::int64_t i2 = 2; i2 <= m; ++i2) {
      const double expected =
          1.0 + 2.0 / (1.0 / tau2(1, i2 - 1) + alpha / tau1(m, (i2 + 1) / 2));
      EXPECT_NEAR(tau2(1, i2), expected, 1e-12 * expected);
    }
  }
}

TEST(Tree, SmallestCell) {
  auto t = AdaptiveTree::build_root(2, {2, 2, 1}, 0.5);
  EXPECT_DOUBLE_EQ(t.smallest_cell(), 0.5);
  t.refine({0, {0, 0, 0}});
  t.refine({1, {1, 1, 0}});
  EXPECT_DOUBLE_EQ(t.smallest_cell(), 0.125);
}
