#include "milu/adaptive_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "milu/error.hpp"

namespace milu {

namespace {

std::string key_string(const CellKey& k) {
  return "level " + std::to_string(k.level) + " anchor (" + std::to_string(k.anchor[0]) + "," +
         std::to_string(k.anchor[1]) + "," + std::to_string(k.anchor[2]) + ")";
}

CellKey parent_of(const CellKey& k) {
  return {k.level - 1, {k.anchor[0] >> 1, k.anchor[1] >> 1, k.anchor[2] >> 1}};
}

}  // namespace

const char* to_string(Relation r) {
  switch (r) {
    case Relation::SameLevel: return "same_level";
    case Relation::Finer: return "finer";
    case Relation::Coarser: return "coarser";
  }
  return "?";
}

AdaptiveTree AdaptiveTree::build_root(int dim, const GridPoint& extents, double root_h,
                                      const Point& origin) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::InvalidDimension, "tree dimension must be 2 or 3");
  if (!(root_h > 0.0)) throw Error(ErrorCode::InvalidArgument, "root cell length must be positive");
  AdaptiveTree t;
  t.dim_ = dim;
  t.extents_ = {extents[0], extents[1], dim == 3 ? extents[2] : 1};
  for (int ax = 0; ax < dim; ++ax) {
    if (t.extents_[ax] < 1) throw Error(ErrorCode::InvalidArgument, "root extents must be >= 1");
  }
  t.root_h_ = root_h;
  t.origin_ = origin;
  for (int z = 0; z < t.extents_[2]; ++z)
    for (int y = 0; y < t.extents_[1]; ++y)
      for (int x = 0; x < t.extents_[0]; ++x) t.cells_[{0, {x, y, z}}] = true;
  t.reindex();
  return t;
}

AdaptiveTree AdaptiveTree::random_tree(int dim, const GridPoint& extents, int max_depth,
                                       double refine_probability, std::uint64_t seed,
                                       double root_h) {
  if (!(refine_probability >= 0.0 && refine_probability <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "refine probability must lie in [0, 1]");
  }
  if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max depth must be >= 0");
  AdaptiveTree t = build_root(dim, extents, root_h);
  std::mt19937_64 gen(seed);
  // Hand conversion keeps the stream identical across standard libraries.
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  for (int level = 0; level < max_depth; ++level) {
    std::vector<CellKey> current;
    for (const auto& k : t.leaves_)
      if (k.level == level) current.push_back(k);
    for (const auto& k : current) {
      const bool hit = uniform() < refine_probability;
      if (hit && t.find_leaf(k) >= 0) t.refine(k);
    }
  }
  return t;
}

Index AdaptiveTree::find_leaf(const CellKey& key) const {
  auto it = leaf_id_.find(key);
  return it == leaf_id_.end() ? -1 : it->second;
}

int AdaptiveTree::max_level() const {
  int m = 0;
  for (const auto& k : leaves_) m = std::max(m, k.level);
  return m;
}

void AdaptiveTree::split(const CellKey& key) {
  cells_[key] = false;
  const int nz = dim_ == 3 ? 2 : 1;
  for (int bz = 0; bz < nz; ++bz)
    for (int by = 0; by < 2; ++by)
      for (int bx = 0; bx < 2; ++bx) {
        cells_[{key.level + 1,
                {2 * key.anchor[0] + bx, 2 * key.anchor[1] + by, 2 * key.anchor[2] + bz}}] = true;
      }
}

void AdaptiveTree::refine(const CellKey& key) {
  auto it = cells_.find(key);
  if (it == cells_.end() || !it->second) {
    throw Error(ErrorCode::CellNotLeaf, "only leaf cells can be refined", key_string(key));
  }
  // Any face neighbor region not present at this level is covered by a
  // coarser leaf, which must be split first.
  std::vector<CellKey> pending{key};
  while (!pending.empty()) {
    const CellKey cur = pending.back();
    bool deferred = false;
    if (cur.level > 0) {
      for (int ax = 0; ax < dim_ && !deferred; ++ax) {
        for (int side : {-1, 1}) {
          CellKey nb = cur;
          nb.anchor[ax] += side;
          if (nb.anchor[ax] < 0 || nb.anchor[ax] >= level_extent(cur.level, ax)) continue;
          if (cells_.count(nb)) continue;
          const CellKey coarse = parent_of(nb);
          auto cit = cells_.find(coarse);
          if (cit == cells_.end()) {
            throw Error(ErrorCode::UngradedTree, "tree is not graded before refinement",
                        key_string(cur));
          }
          pending.push_back(coarse);
          deferred = true;
          break;
        }
      }
    }
    if (deferred) continue;
    pending.pop_back();
    auto cit = cells_.find(cur);
    if (cit->second) split(cur);
  }
  reindex();
}

void AdaptiveTree::uniform_refine() {
  const auto current = leaves_;
  for (const auto& k : current) split(k);
  reindex();
}

void AdaptiveTree::reindex() {
  leaves_.clear();
  leaf_id_.clear();
  for (const auto& [k, is_leaf] : cells_) {
    if (!is_leaf) continue;
    leaf_id_.emplace(k, static_cast<Index>(leaves_.size()));
    leaves_.push_back(k);
  }
}

std::vector<CellNeighbor> AdaptiveTree::neighbors(Index id) const {
  if (id < 0 || id >= num_leaves()) {
    throw Error(ErrorCode::CellNotLeaf, "leaf id out of range", std::to_string(id));
  }
  const CellKey& key = leaves_[id];
  std::vector<CellNeighbor> out;
  for (int ax = 0; ax < dim_; ++ax) {
    for (int side : {-1, 1}) {
      CellKey nb = key;
      nb.anchor[ax] += side;
      if (nb.anchor[ax] < 0 || nb.anchor[ax] >= level_extent(key.level, ax)) continue;
      auto it = cells_.find(nb);
      if (it != cells_.end() && it->second) {
        out.push_back({leaf_id_.at(nb), Relation::SameLevel, ax, side});
        continue;
      }
      if (it != cells_.end()) {
        // Internal: the children touching the shared face must be leaves.
        const int touch = side > 0 ? 0 : 1;
        const int nz = dim_ == 3 ? 2 : 1;
        for (int bz = 0; bz < nz; ++bz)
          for (int by = 0; by < 2; ++by)
            for (int bx = 0; bx < 2; ++bx) {
              std::array<int, 3> b{bx, by, bz};
              if (b[ax] != touch) continue;
              const CellKey child{nb.level + 1,
                                  {2 * nb.anchor[0] + b[0], 2 * nb.anchor[1] + b[1],
                                   2 * nb.anchor[2] + b[2]}};
              const Index cid = find_leaf(child);
              if (cid < 0) {
                throw Error(ErrorCode::UngradedTree, "adjacent leaves differ by more than one level",
                            key_string(key));
              }
              out.push_back({cid, Relation::Finer, ax, side});
            }
        continue;
      }
      const Index pid = key.level > 0 ? find_leaf(parent_of(nb)) : -1;
      if (pid < 0) {
        throw Error(ErrorCode::UngradedTree, "adjacent leaves differ by more than one level",
                    key_string(key));
      }
      out.push_back({pid, Relation::Coarser, ax, side});
    }
  }
  return out;
}

int AdaptiveTree::boundary_faces(Index id) const {
  const CellKey& key = leaves_.at(id);
  int count = 0;
  for (int ax = 0; ax < dim_; ++ax) {
    if (key.anchor[ax] == 0) ++count;
    if (key.anchor[ax] == level_extent(key.level, ax) - 1) ++count;
  }
  return count;
}

bool AdaptiveTree::is_graded() const {
  try {
    for (Index i = 0; i < num_leaves(); ++i) neighbors(i);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UngradedTree) return false;
    throw;
  }
  return true;
}

double AdaptiveTree::cell_length(Index id) const {
  return std::ldexp(root_h_, -leaves_.at(id).level);
}

Point AdaptiveTree::center(Index id) const {
  const CellKey& k = leaves_.at(id);
  const double l = cell_length(id);
  Point p{0.0, 0.0, 0.0};
  for (int ax = 0; ax < dim_; ++ax) p[ax] = origin_[ax] + (static_cast<double>(k.anchor[ax]) + 0.5) * l;
  return p;
}

std::vector<int> AdaptiveTree::path(Index id) const {
  const CellKey& k = leaves_.at(id);
  std::vector<int> p;
  p.reserve(k.level + 1);
  std::array<std::int64_t, 3> root{};
  for (int ax = 0; ax < 3; ++ax) root[ax] = k.anchor[ax] >> k.level;
  p.push_back(static_cast<int>((root[2] * extents_[1] + root[1]) * extents_[0] + root[0]));
  for (int depth = k.level - 1; depth >= 0; --depth) {
    int child = 0;
    for (int ax = 0; ax < dim_; ++ax) child |= static_cast<int>((k.anchor[ax] >> depth) & 1) << ax;
    p.push_back(child);
  }
  return p;
}

double AdaptiveTree::smallest_cell() const { return std::ldexp(root_h_, -max_level()); }

double AdaptiveTree::domain_volume() const {
  double v = 1.0;
  for (int ax = 0; ax < dim_; ++ax) v *= extents_[ax] * root_h_;
  return v;
}

nlohmann::json AdaptiveTree::to_json() const {
  nlohmann::json leaves = nlohmann::json::array();
  for (Index i = 0; i < num_leaves(); ++i) {
    const CellKey& k = leaves_[i];
    nlohmann::json anchor = nlohmann::json::array();
    for (int ax = 0; ax < dim_; ++ax) anchor.push_back(k.anchor[ax]);
    leaves.push_back({{"path", path(i)}, {"level", k.level}, {"anchor", anchor}});
  }
  nlohmann::json ext = nlohmann::json::array();
  for (int ax = 0; ax < dim_; ++ax) ext.push_back(extents_[ax]);
  return {{"d", dim_},
          {"root_extents", ext},
          {"root_h", root_h_},
          {"origin", std::vector<double>(origin_.begin(), origin_.begin() + dim_)},
          {"leaves", leaves}};
}

AdaptiveTree AdaptiveTree::from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& msg) { return Error(ErrorCode::MalformedFile, msg); };
  AdaptiveTree t;
  try {
    const int d = j.at("d").get<int>();
    if (d != 2 && d != 3) throw Error(ErrorCode::InvalidDimension, "tree dimension must be 2 or 3");
    const auto ext = j.at("root_extents").get<std::vector<int>>();
    if (static_cast<int>(ext.size()) != d) throw bad("root_extents length differs from d");
    GridPoint e{1, 1, 1};
    for (int ax = 0; ax < d; ++ax) e[ax] = ext[ax];
    Point origin{0.0, 0.0, 0.0};
    if (j.contains("origin")) {
      const auto o = j.at("origin").get<std::vector<double>>();
      if (static_cast<int>(o.size()) != d) throw bad("origin length differs from d");
      for (int ax = 0; ax < d; ++ax) origin[ax] = o[ax];
    }
    t = build_root(d, e, j.value("root_h", 1.0), origin);
    t.cells_.clear();
    std::vector<CellKey> keys;
    for (const auto& leaf : j.at("leaves")) {
      CellKey k;
      k.level = leaf.at("level").get<int>();
      const auto a = leaf.at("anchor").get<std::vector<std::int64_t>>();
      if (k.level < 0 || k.level > 40 || static_cast<int>(a.size()) != d) {
        throw bad("bad leaf level or anchor");
      }
      for (int ax = 0; ax < d; ++ax) {
        if (a[ax] < 0 || a[ax] >= t.level_extent(k.level, ax)) throw bad("leaf anchor out of range");
        k.anchor[ax] = a[ax];
      }
      if (t.cells_.count(k)) throw bad("duplicate leaf " + key_string(k));
      t.cells_[k] = true;
      keys.push_back(k);
    }
    // Ancestors become internal cells; a leaf may not be an ancestor.
    for (const auto& k : keys) {
      for (CellKey a = k; a.level > 0;) {
        a = parent_of(a);
        auto [it, inserted] = t.cells_.emplace(a, false);
        if (!inserted && it->second) throw bad("leaf " + key_string(a) + " has descendants");
        if (!inserted) break;
      }
    }
    t.reindex();
    // Partition check: every internal cell has all children, every root cell exists.
    for (int z = 0; z < t.extents_[2]; ++z)
      for (int y = 0; y < t.extents_[1]; ++y)
        for (int x = 0; x < t.extents_[0]; ++x)
          if (!t.cells_.count({0, {x, y, z}})) throw bad("leaves do not cover the domain");
    const int nz = d == 3 ? 2 : 1;
    for (const auto& [k, is_leaf] : t.cells_) {
      if (is_leaf) continue;
      for (int bz = 0; bz < nz; ++bz)
        for (int by = 0; by < 2; ++by)
          for (int bx = 0; bx < 2; ++bx)
            if (!t.cells_.count({k.level + 1,
                                 {2 * k.anchor[0] + bx, 2 * k.anchor[1] + by, 2 * k.anchor[2] + bz}})) {
              throw bad("leaves do not cover " + key_string(k));
            }
    }
    for (const auto& leaf : j.at("leaves")) {
      if (!leaf.contains("path")) continue;
      CellKey k;
      k.level = leaf.at("level").get<int>();
      const auto a = leaf.at("anchor").get<std::vector<std::int64_t>>();
      for (int ax = 0; ax < d; ++ax) k.anchor[ax] = a[ax];
      if (leaf.at("path").get<std::vector<int>>() != t.path(t.find_leaf(k))) {
        throw bad("path disagrees with anchor for " + key_string(k));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad(std::string("tree JSON: ") + e.what());
  }
  return t;
}

VertexOrdering tree_order(const AdaptiveTree& tree) {
  const Index n = tree.num_leaves();
  std::vector<std::vector<int>> paths(n);
  for (Index i = 0; i < n; ++i) paths[i] = tree.path(i);
  std::vector<Index> seq(n);
  for (Index i = 0; i < n; ++i) seq[i] = i;
  std::sort(seq.begin(), seq.end(), [&](Index a, Index b) { return paths[a] < paths[b]; });
  return VertexOrdering::from_sequence(std::move(seq));
}

ScalarField scalar_field_from_name(const std::string& name) {
  using std::numbers::pi;
  if (name == "one") return {name, [](const Point&) { return 1.0; }};
  if (name == "example1") {
    return {name, [](const Point& p) { return std::sin(pi * p[0]) * std::cos(2.0 * pi * p[1]) + 1.5; }};
  }
  if (name == "example2") {
    return {name, [](const Point& p) {
              return std::exp(3.0 - 2.0 * p[0]) * p[1] * (3.0 - 3.0 * p[1]) + 0.5;
            }};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sigma field '" + name + "'");
}

SpdMSystem fvm_matrix(const AdaptiveTree& tree, const ScalarField& sigma) {
  const Index n = tree.num_leaves();
  std::vector<double> s(n);
  for (Index i = 0; i < n; ++i) {
    s[i] = sigma.eval(tree.center(i));
    if (!(s[i] > 0.0) || !std::isfinite(s[i])) {
      throw Error(ErrorCode::NonPositiveSigma, "sigma must be positive at every cell center",
                  sigma.name + " at leaf " + std::to_string(i));
    }
  }
  const bool three_d = tree.dim() == 3;
  std::vector<WeightedEdge> edges;
  std::vector<double> slack(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    const double li = tree.cell_length(i);
    for (const auto& nb : tree.neighbors(i)) {
      const Index j = nb.leaf;
      double w = 0.0;
      if (nb.relation == Relation::SameLevel) {
        if (j < i) continue;
        w = 2.0 / (1.0 / s[i] + 1.0 / s[j]);
        if (three_d) w *= li;
      } else if (nb.relation == Relation::Coarser) {
        // Each level-jump pair is emitted once, from the finer side.
        w = 3.0 * kLevelJumpAlpha / (1.0 / s[i] + 2.0 / s[j]);
        if (three_d) w *= li;
      } else {
        continue;
      }
      edges.push_back({i, j, w});
    }
    const int nb_boundary = tree.boundary_faces(i);
    slack[i] = 2.0 * nb_boundary * s[i] * (three_d ? li : 1.0);
  }
  return SpdMSystem::assemble(n, edges, slack);
}

}  // namespace milu
