#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "milu/adaptive_tree.hpp"
#include "milu/graph_system.hpp"
#include "milu/ordering.hpp"

namespace milu::fixtures {

/// Connected random SPD M-system: a random spanning tree plus extra edges,
/// weights in [0.1, 2], slack on roughly a third of the vertices (at least one).
inline SpdMSystem random_system(std::mt19937_64& gen, Index n, double extra_edge_prob = 0.1) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<WeightedEdge> edges;
  for (Index k = 1; k < n; ++k) {
    std::uniform_int_distribution<Index> pick(0, k - 1);
    edges.push_back({pick(gen), k, w(gen)});
  }
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      if (u(gen) >= extra_edge_prob) continue;
      const bool dup = std::any_of(edges.begin(), edges.end(), [&](const WeightedEdge& e) {
        return (e.a == a && e.b == b) || (e.a == b && e.b == a);
      });
      if (!dup) edges.push_back({a, b, w(gen)});
    }
  std::vector<double> slack(n, 0.0);
  for (auto& s : slack)
    if (u(gen) < 0.3) s = w(gen);
  std::uniform_int_distribution<Index> any(0, n - 1);
  slack[any(gen)] += w(gen);
  return SpdMSystem::assemble(n, edges, slack);
}

inline VertexOrdering random_ordering(std::mt19937_64& gen, Index n) {
  std::vector<Index> seq(n);
  std::iota(seq.begin(), seq.end(), 0);
  std::shuffle(seq.begin(), seq.end(), gen);
  return VertexOrdering::from_sequence(std::move(seq));
}

struct RandomCase {
  SpdMSystem system;
  VertexOrdering ordering;
};

/// Random system and ordering with finite tau everywhere: every vertex without
/// predecessors in the ordering carries slack.
inline RandomCase random_case(std::mt19937_64& gen, Index n, double extra_edge_prob = 0.1) {
  const auto base = random_system(gen, n, extra_edge_prob);
  auto ord = random_ordering(gen, n);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::vector<double> slack(n);
  for (Index k = 0; k < n; ++k) {
    slack[k] = base.slack(k);
    const auto nb = base.neighbors(k);
    const bool source = std::none_of(nb.begin(), nb.end(), [&](Index q) { return ord.precedes(q, k); });
    if (source && slack[k] == 0.0) slack[k] = w(gen);
  }
  const auto edges = base.edges();
  return {SpdMSystem::assemble(n, edges, slack), std::move(ord)};
}

/// Root 2x2 on the unit square; root cell (1,0) refined once, then the whole
/// tree refined `n` times.
inline AdaptiveTree t_junction_tree(int n) {
  auto tree = AdaptiveTree::build_root(2, {2, 2, 1}, 0.5);
  tree.refine({0, {1, 0, 0}});
  for (int k = 0; k < n; ++k) tree.uniform_refine();
  return tree;
}

}  // namespace milu::fixtures
