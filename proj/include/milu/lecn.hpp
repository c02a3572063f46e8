#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "milu/graph_system.hpp"
#include "milu/ordering.hpp"
#include "milu/preconditioners.hpp"

namespace milu {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Per-vertex localized condition-number estimates. Infinite entries are
/// legitimate values (a zero-slack vertex without precursors).
struct LecnReport {
  std::vector<double> tau;
  double max_tau = 1.0;
  Index argmax = -1;
  Index num_infinite = 0;
};

/// tau_K = e_K / (e_K - S(K)) from an existing factorization.
LecnReport tau_direct(const SpdMSystem& a, const MiluFactorization& f);

/// tau_K = 1 + S(K) / (b_K + sum_{K1 in p(K)} c(K,K1) / tau_K1), evaluated in
/// rank order without forming e.
LecnReport tau_recursive(const SpdMSystem& a, const VertexOrdering& ord);

/// Upper bound on kappa(M^{-1} A): the maximum tau.
double lecn_bound(const LecnReport& report);

enum class OrderKind { Lexicographic, Sector };

/// Closed-form uniform-grid bound 1 + d + d*l_max/h (lexicographic) or
/// 1 + d + d*l_max/(2h) (sectored).
double theoretical_bound(OrderKind kind, int dim, double l_max, double h);

/// CSV `vertex,x,y,z,tau` (coordinates optional), tau printed as `inf` when
/// infinite.
void write_tau_csv(std::ostream& out, const LecnReport& report,
                   std::span<const GridPoint> coords = {});

}  // namespace milu
