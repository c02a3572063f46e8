#include "milu/lecn.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "milu/error.hpp"

namespace milu {

namespace {

void summarize(LecnReport& r) {
  r.max_tau = 1.0;
  r.argmax = r.tau.empty() ? -1 : 0;
  r.num_infinite = 0;
  for (std::size_t k = 0; k < r.tau.size(); ++k) {
    if (std::isinf(r.tau[k])) ++r.num_infinite;
    if (r.tau[k] > r.max_tau) {
      r.max_tau = r.tau[k];
      r.argmax = static_cast<Index>(k);
    }
  }
}

}  // namespace

LecnReport tau_direct(const SpdMSystem& a, const MiluFactorization& f) {
  if (f.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "factorization and system sizes differ");
  }
  LecnReport r;
  r.tau.resize(a.size());
  const auto e = f.e();
  const auto s = f.successor_weight_sum();
  for (Index k = 0; k < a.size(); ++k) {
    if (s[k] == 0.0) {
      r.tau[k] = 1.0;
      continue;
    }
    const double denom = e[k] - s[k];
    r.tau[k] = denom > 0.0 ? e[k] / denom : kInfinity;
  }
  summarize(r);
  return r;
}

LecnReport tau_recursive(const SpdMSystem& a, const VertexOrdering& ord) {
  if (ord.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ordering size differs from system size");
  }
  LecnReport r;
  r.tau.assign(a.size(), 1.0);
  for (Index pos = 0; pos < a.size(); ++pos) {
    const Index k = ord.vertex_at(pos);
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    double succ = 0.0;
    double denom = a.slack(k);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (ord.precedes(nb[i], k)) {
        denom += w[i] / r.tau[nb[i]];  // 1/inf contributes nothing
      } else {
        succ += w[i];
      }
    }
    if (succ == 0.0) {
      r.tau[k] = 1.0;
    } else {
      r.tau[k] = denom > 0.0 ? 1.0 + succ / denom : kInfinity;
    }
  }
  summarize(r);
  return r;
}

double lecn_bound(const LecnReport& report) { return report.max_tau; }

double theoretical_bound(OrderKind kind, int dim, double l_max, double h) {
  if (dim != 2 && dim != 3) {
    throw Error(ErrorCode::InvalidDimension, "bounds are defined for d = 2 or 3",
                "d = " + std::to_string(dim));
  }
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
  const double path = kind == OrderKind::Lexicographic ? dim * l_max / h : dim * l_max / (2.0 * h);
  return 1.0 + dim + path;
}

void write_tau_csv(std::ostream& out, const LecnReport& report, std::span<const GridPoint> coords) {
  const bool with_coords = coords.size() == report.tau.size() && !coords.empty();
  out << (with_coords ? "vertex,x,y,z,tau\n" : "vertex,tau\n");
  char buf[40];
  for (std::size_t k = 0; k < report.tau.size(); ++k) {
    out << k << ',';
    if (with_coords) out << coords[k][0] << ',' << coords[k][1] << ',' << coords[k][2] << ',';
    if (std::isinf(report.tau[k])) {
      out << "inf\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", report.tau[k]);
      out << buf << '\n';
    }
  }
}

}  // namespace milu
