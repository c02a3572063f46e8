#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "milu/graph_system.hpp"
#include "milu/ordering.hpp"
#include "milu/stencils.hpp"

namespace milu {

/// Cell identity: refinement level plus integer anchor measured in cells of
/// that level (a level-L cell covers [a, a+1) * 2^-L root cells per axis).
struct CellKey {
  int level = 0;
  std::array<std::int64_t, 3> anchor{0, 0, 0};

  /// Canonical order: level, then z, y, x.
  friend bool operator<(const CellKey& l, const CellKey& r) {
    if (l.level != r.level) return l.level < r.level;
    for (int ax = 2; ax >= 0; --ax)
      if (l.anchor[ax] != r.anchor[ax]) return l.anchor[ax] < r.anchor[ax];
    return false;
  }
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

enum class Relation { SameLevel, Finer, Coarser };
const char* to_string(Relation r);

struct CellNeighbor {
  Index leaf = 0;
  Relation relation = Relation::SameLevel;
  int axis = 0;
  int side = 1;
};

/// Graded quadtree (d = 2) or octree (d = 3) over a uniform grid of root
/// cells of side `root_h`. Leaves are numbered in canonical CellKey order;
/// the ids are recomputed after every mutation.
class AdaptiveTree {
 public:
  static AdaptiveTree build_root(int dim, const GridPoint& extents, double root_h = 1.0,
                                 const Point& origin = {0.0, 0.0, 0.0});

  /// Breadth-first pass over levels 0..max_depth-1; each leaf on the current
  /// level is refined with probability p (one draw per leaf, canonical
  /// order, mt19937_64 seeded with `seed`).
  static AdaptiveTree random_tree(int dim, const GridPoint& extents, int max_depth,
                                  double refine_probability, std::uint64_t seed,
                                  double root_h = 1.0);

  int dim() const noexcept { return dim_; }
  const GridPoint& extents() const noexcept { return extents_; }
  double root_h() const noexcept { return root_h_; }
  const Point& origin() const noexcept { return origin_; }

  Index num_leaves() const noexcept { return static_cast<Index>(leaves_.size()); }
  const std::vector<CellKey>& leaves() const noexcept { return leaves_; }
  const CellKey& leaf(Index id) const { return leaves_.at(id); }
  /// -1 when `key` is not a leaf.
  Index find_leaf(const CellKey& key) const;
  bool contains(const CellKey& key) const { return cells_.count(key) != 0; }
  int max_level() const;

  /// Splits a leaf; coarser face neighbors are refined first so the tree
  /// stays graded. Throws CellNotLeaf.
  void refine(const CellKey& key);
  void refine_leaf(Index id) { refine(leaf(id)); }
  void uniform_refine();

  /// Face neighbors of a leaf. A coarse cell sees 2^(d-1) finer leaves per
  /// side. Throws CellNotLeaf, UngradedTree.
  std::vector<CellNeighbor> neighbors(Index id) const;
  /// Number of faces of the leaf on the domain boundary.
  int boundary_faces(Index id) const;
  bool is_graded() const;

  double cell_length(Index id) const;
  Point center(Index id) const;
  /// Root-grid lexicographic rank followed by the child index at each level
  /// (child index bx + 2 by + 4 bz).
  std::vector<int> path(Index id) const;
  double smallest_cell() const;
  double domain_volume() const;

  nlohmann::json to_json() const;
  static AdaptiveTree from_json(const nlohmann::json& j);

 private:
  AdaptiveTree() = default;
  void split(const CellKey& key);
  void reindex();
  std::int64_t level_extent(int level, int axis) const {
    return static_cast<std::int64_t>(extents_[axis]) << level;
  }

  int dim_ = 2;
  GridPoint extents_{1, 1, 1};
  double root_h_ = 1.0;
  Point origin_{0.0, 0.0, 0.0};
  std::map<CellKey, bool> cells_;  // value: leaf flag
  std::vector<CellKey> leaves_;
  std::map<CellKey, Index> leaf_id_;
};

/// Leaves sorted by path: descendants keep the rank interval of their parent.
VertexOrdering tree_order(const AdaptiveTree& tree);

struct ScalarField {
  std::string name;
  std::function<double(const Point&)> eval;
};

/// Registry: `one`, `example1`, `example2`.
ScalarField scalar_field_from_name(const std::string& name);

inline constexpr double kLevelJumpAlpha = 2.0 / 3.0;

/// Cell-centered finite-volume matrix with σ sampled at cell centers.
/// Throws NonPositiveSigma, UngradedTree.
SpdMSystem fvm_matrix(const AdaptiveTree& tree, const ScalarField& sigma);

}  // namespace milu
