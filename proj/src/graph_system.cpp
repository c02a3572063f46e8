#include "milu/graph_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "milu/error.hpp"

namespace milu {

SpdMSystem SpdMSystem::assemble(Index n, std::span<const WeightedEdge> edges,
                                std::span<const double> slack) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "negative vertex count");
  if (slack.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch, "slack vector length differs from vertex count");
  }
  for (Index k = 0; k < n; ++k) {
    if (!std::isfinite(slack[k])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite slack", "vertex " + std::to_string(k));
    }
    if (slack[k] < 0.0) {
      throw Error(ErrorCode::NegativeWeight, "negative slack", "vertex " + std::to_string(k));
    }
  }

  std::vector<WeightedEdge> canon;
  canon.reserve(edges.size());
  for (const auto& e : edges) {
    const std::string where = "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range", where);
    }
    if (e.a == e.b) throw Error(ErrorCode::SelfLoopEdge, "self-loop given as an edge", where);
    if (!std::isfinite(e.weight)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite edge weight", where);
    }
    if (e.weight < 0.0) throw Error(ErrorCode::NegativeWeight, "negative edge weight", where);
    if (e.weight == 0.0) continue;
    canon.push_back({std::min(e.a, e.b), std::max(e.a, e.b), e.weight});
  }
  std::sort(canon.begin(), canon.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  std::vector<WeightedEdge> unique;
  unique.reserve(canon.size());
  for (const auto& e : canon) {
    if (!unique.empty() && unique.back().a == e.a && unique.back().b == e.b) {
      if (unique.back().weight != e.weight) {
        throw Error(ErrorCode::AsymmetricInput, "edge repeated with a different weight",
                    "edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
      }
      continue;
    }
    unique.push_back(e);
  }

  SpdMSystem sys;
  sys.slack_.assign(slack.begin(), slack.end());
  std::vector<std::size_t> count(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : unique) {
    ++count[e.a + 1];
    ++count[e.b + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());
  sys.row_ptr_ = count;
  sys.cols_.resize(2 * unique.size());
  sys.weights_.resize(2 * unique.size());
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  // Edges sorted by (a,b): row r first receives its smaller neighbors (as the
  // b-endpoint, ascending a), then its larger ones, so rows come out sorted.
  for (const auto& e : unique) {
    sys.cols_[fill[e.a]] = e.b;
    sys.weights_[fill[e.a]++] = e.weight;
    sys.cols_[fill[e.b]] = e.a;
    sys.weights_[fill[e.b]++] = e.weight;
  }
  sys.diagonal_.resize(n);
  for (Index k = 0; k < n; ++k) {
    double d = 0.0;
    for (double w : sys.weights(k)) d += w;
    sys.diagonal_[k] = d + sys.slack_[k];
  }
  return sys;
}

double SpdMSystem::max_diagonal() const {
  double m = 0.0;
  for (double d : diagonal_) m = std::max(m, d);
  return m;
}

double SpdMSystem::entry(Index a, Index b) const {
  if (a == b) return diagonal_[a];
  const auto nb = neighbors(a);
  const auto it = std::lower_bound(nb.begin(), nb.end(), b);
  if (it == nb.end() || *it != b) return 0.0;
  return -weights(a)[static_cast<std::size_t>(it - nb.begin())];
}

std::vector<double> SpdMSystem::matvec(std::span<const double> v) const {
  std::vector<double> out(v.size());
  matvec(v, out);
  return out;
}

void SpdMSystem::matvec(std::span<const double> v, std::span<double> out) const {
  const Index n = size();
  if (v.size() != static_cast<std::size_t>(n) || out.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch, "matvec: vector length differs from system size");
  }
  for (Index k = 0; k < n; ++k) {
    double acc = diagonal_[k] * v[k];
    for (std::size_t p = row_ptr_[k]; p < row_ptr_[k + 1]; ++p) acc -= weights_[p] * v[cols_[p]];
    out[k] = acc;
  }
}

std::vector<WeightedEdge> SpdMSystem::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(num_edges());
  for (Index k = 0; k < size(); ++k) {
    const auto nb = neighbors(k);
    const auto w = weights(k);
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (nb[i] > k) out.push_back({k, nb[i], w[i]});
  }
  return out;
}

SystemDiagnostics validate(const SpdMSystem& a) {
  SystemDiagnostics d;
  const Index n = a.size();
  for (Index k = 0; k < n; ++k) {
    if (a.slack(k) < 0.0) {
      d.signs_ok = false;
      d.failures.push_back("negative slack at vertex " + std::to_string(k));
    }
    if (a.slack(k) > 0.0) d.has_positive_slack = true;
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (!(w[i] > 0.0)) {
        d.signs_ok = false;
        d.failures.push_back("non-positive weight on edge (" + std::to_string(k) + "," +
                             std::to_string(nb[i]) + ")");
      }
      if (nb[i] == k) {
        d.signs_ok = false;
        d.failures.push_back("self entry in adjacency of vertex " + std::to_string(k));
      }
      if (a.entry(nb[i], k) != -w[i]) {
        d.symmetric = false;
        d.failures.push_back("asymmetric edge (" + std::to_string(k) + "," +
                             std::to_string(nb[i]) + ")");
      }
    }
  }

  // Components by iterative DFS; each one needs some positive slack.
  std::vector<Index> comp(n, -1);
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const Index id = d.num_components++;
    bool slack_found = false;
    comp[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index k = stack.back();
      stack.pop_back();
      if (a.slack(k) > 0.0) slack_found = true;
      for (Index nb : a.neighbors(k)) {
        if (comp[nb] < 0) {
          comp[nb] = id;
          stack.push_back(nb);
        }
      }
    }
    if (!slack_found) ++d.components_without_slack;
  }
  if (n == 0) d.failures.push_back("empty system");
  if (d.components_without_slack > 0) {
    d.failures.push_back(std::to_string(d.components_without_slack) +
                         " connected component(s) without a vertex of positive slack");
  }
  return d;
}

DenseMatrix densify(const SpdMSystem& a) {
  const auto n = static_cast<std::size_t>(a.size());
  if (n > DenseMatrix::kMaxOracleSize) {
    throw Error(ErrorCode::OracleSizeExceeded, "densify is limited to 200 vertices",
                "n = " + std::to_string(n));
  }
  DenseMatrix m(n);
  for (Index k = 0; k < a.size(); ++k) {
    m(k, k) = a.diagonal(k);
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    for (std::size_t i = 0; i < nb.size(); ++i) m(k, nb[i]) = -w[i];
  }
  return m;
}

}  // namespace milu
