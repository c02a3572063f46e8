#include "milu/preconditioners.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "milu/error.hpp"

namespace milu {

namespace {

void check_size(std::size_t got, Index want, const char* what) {
  if (got != static_cast<std::size_t>(want)) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": vector length mismatch",
                "expected " + std::to_string(want) + ", got " + std::to_string(got));
  }
}

void check_ordering(const SpdMSystem& a, const VertexOrdering& ord) {
  if (ord.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ordering size differs from system size");
  }
}

template <class Op>
DenseMatrix densify_operator(Index n, Op&& op) {
  if (static_cast<std::size_t>(n) > DenseMatrix::kMaxOracleSize) {
    throw Error(ErrorCode::OracleSizeExceeded, "operator densify is limited to 200 vertices");
  }
  DenseMatrix m(n);
  std::vector<double> basis(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    basis[j] = 1.0;
    const auto col = op(basis);
    for (Index i = 0; i < n; ++i) m(i, j) = col[i];
    basis[j] = 0.0;
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------- MILU

MiluFactorization milu_factor(const SpdMSystem& a, const VertexOrdering& ord) {
  check_ordering(a, ord);
  const Index n = a.size();
  MiluFactorization f;
  f.ordering_ = ord;
  f.e_.assign(n, 0.0);
  f.successor_sum_.assign(n, 0.0);

  for (Index k = 0; k < n; ++k) {
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    double s = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (ord.precedes(k, nb[i])) s += w[i];
    f.successor_sum_[k] = s;
  }

  f.lower_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index pos = 0; pos < n; ++pos) {
    const Index k = ord.vertex_at(pos);
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    double e = a.diagonal(k);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      const Index k1 = nb[i];
      if (!ord.precedes(k1, k)) continue;
      const double e1 = f.e_[k1];
      if (!(e1 > 0.0)) {
        throw Error(ErrorCode::NonPositivePivot, "non-positive MILU pivot used as divisor",
                    "vertex " + std::to_string(k1));
      }
      e -= w[i] * f.successor_sum_[k1] / e1;
      f.lower_pos_.push_back(ord.rank(k1));
      f.lower_w_.push_back(w[i]);
    }
    f.lower_ptr_[pos + 1] = f.lower_pos_.size();
    if (f.successor_sum_[k] > 0.0 && e < 1e-14 * a.diagonal(k)) {
      throw Error(ErrorCode::NonPositivePivot, "degenerate MILU pivot",
                  "vertex " + std::to_string(k) + ", e = " + std::to_string(e));
    }
    f.e_[k] = e;
  }
  return f;
}

std::vector<double> MiluFactorization::apply_inverse(std::span<const double> r) const {
  const Index n = size();
  check_size(r.size(), n, "milu apply_inverse");
  std::vector<double> ep(n);
  for (Index pos = 0; pos < n; ++pos) {
    ep[pos] = e_[ordering_.vertex_at(pos)];
    if (!(ep[pos] > 0.0)) {
      throw Error(ErrorCode::NonPositivePivot, "singular MILU factor (zero pivot)",
                  "vertex " + std::to_string(ordering_.vertex_at(pos)));
    }
  }
  // (L + E) u = r, rank order
  std::vector<double> w(n);
  for (Index pos = 0; pos < n; ++pos) {
    double acc = r[ordering_.vertex_at(pos)];
    for (std::size_t p = lower_ptr_[pos]; p < lower_ptr_[pos + 1]; ++p)
      acc += lower_w_[p] * w[lower_pos_[p]];
    w[pos] = acc / ep[pos];
  }
  // v = E u, then (L + E)^T z = v column-wise in reverse rank order
  for (Index pos = 0; pos < n; ++pos) w[pos] *= ep[pos];
  std::vector<double> z(n);
  for (Index pos = n; pos-- > 0;) {
    const double zi = w[pos] / ep[pos];
    for (std::size_t p = lower_ptr_[pos]; p < lower_ptr_[pos + 1]; ++p)
      w[lower_pos_[p]] += lower_w_[p] * zi;
    z[ordering_.vertex_at(pos)] = zi;
  }
  return z;
}

std::vector<double> MiluFactorization::apply(std::span<const double> v) const {
  const Index n = size();
  check_size(v.size(), n, "milu apply");
  // y = (L + E)^T v
  std::vector<double> y(n);
  for (Index pos = 0; pos < n; ++pos) y[pos] = e_[ordering_.vertex_at(pos)] * v[ordering_.vertex_at(pos)];
  for (Index pos = 0; pos < n; ++pos) {
    const double vi = v[ordering_.vertex_at(pos)];
    for (std::size_t p = lower_ptr_[pos]; p < lower_ptr_[pos + 1]; ++p) y[lower_pos_[p]] -= lower_w_[p] * vi;
  }
  // M v = (L E^{-1} + I) y
  std::vector<double> out(n);
  for (Index pos = 0; pos < n; ++pos) {
    double acc = y[pos];
    for (std::size_t p = lower_ptr_[pos]; p < lower_ptr_[pos + 1]; ++p) {
      const Index j = lower_pos_[p];
      const double ej = e_[ordering_.vertex_at(j)];
      if (!(ej > 0.0)) {
        throw Error(ErrorCode::NonPositivePivot, "singular MILU factor (zero pivot)");
      }
      acc -= lower_w_[p] * y[j] / ej;
    }
    out[ordering_.vertex_at(pos)] = acc;
  }
  return out;
}

DenseMatrix MiluFactorization::densify() const {
  return densify_operator(size(), [&](const std::vector<double>& v) { return apply(v); });
}

std::vector<double> milu_apply_inverse(const MiluFactorization& f, const SpdMSystem& a,
                                       std::span<const double> r) {
  if (f.size() != a.size()) {
    throw Error(ErrorCode::DimensionMismatch, "factorization and system sizes differ");
  }
  return f.apply_inverse(r);
}

std::vector<double> residual_rowsums(const SpdMSystem& a, const MiluFactorization& f) {
  const Index n = a.size();
  if (f.size() != n) throw Error(ErrorCode::DimensionMismatch, "factorization and system sizes differ");
  std::vector<double> sums(n, 0.0);
  if (static_cast<std::size_t>(n) <= DenseMatrix::kMaxOracleSize) {
    const DenseMatrix m = f.densify();
    const DenseMatrix ad = densify(a);
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = 0; j < n; ++j) s += m(i, j) - ad(i, j);
      sums[i] = s;
    }
    return sums;
  }
  const std::vector<double> ones(n, 1.0);
  const auto m1 = f.apply(ones);
  const auto a1 = a.matvec(ones);
  for (Index i = 0; i < n; ++i) sums[i] = m1[i] - a1[i];
  return sums;
}

nlohmann::json e_vector_to_json(const MiluFactorization& f) {
  return std::vector<double>(f.e().begin(), f.e().end());
}

// ---------------------------------------------------------------- ILU(0)

Ilu0Factorization ilu0_factor(const SpdMSystem& a, const VertexOrdering& ord) {
  check_ordering(a, ord);
  const Index n = a.size();
  Ilu0Factorization f;
  f.ordering_ = ord;
  f.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  f.diag_pos_.assign(n, 0);

  std::vector<std::pair<Index, double>> row;
  for (Index pos = 0; pos < n; ++pos) {
    const Index k = ord.vertex_at(pos);
    row.clear();
    row.emplace_back(pos, a.diagonal(k));
    const auto nb = a.neighbors(k);
    const auto w = a.weights(k);
    for (std::size_t i = 0; i < nb.size(); ++i) row.emplace_back(ord.rank(nb[i]), -w[i]);
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      if (c == pos) f.diag_pos_[pos] = f.cols_.size();
      f.cols_.push_back(c);
      f.vals_.push_back(v);
    }
    f.row_ptr_[pos + 1] = f.cols_.size();
  }

  std::vector<std::ptrdiff_t> marker(n, -1);
  for (Index i = 0; i < n; ++i) {
    for (std::size_t p = f.row_ptr_[i]; p < f.row_ptr_[i + 1]; ++p)
      marker[f.cols_[p]] = static_cast<std::ptrdiff_t>(p);
    for (std::size_t p = f.row_ptr_[i]; p < f.diag_pos_[i]; ++p) {
      const Index k = f.cols_[p];
      const double pivot = f.vals_[f.diag_pos_[k]];
      const double l = f.vals_[p] / pivot;
      f.vals_[p] = l;
      for (std::size_t q = f.diag_pos_[k] + 1; q < f.row_ptr_[k + 1]; ++q) {
        const std::ptrdiff_t target = marker[f.cols_[q]];
        if (target >= 0) f.vals_[target] -= l * f.vals_[q];
      }
    }
    for (std::size_t p = f.row_ptr_[i]; p < f.row_ptr_[i + 1]; ++p) marker[f.cols_[p]] = -1;
    const double d = f.vals_[f.diag_pos_[i]];
    if (!(d > 1e-14 * a.diagonal(ord.vertex_at(i)))) {
      throw Error(ErrorCode::NonPositivePivot, "non-positive ILU(0) pivot",
                  "vertex " + std::to_string(ord.vertex_at(i)));
    }
  }
  return f;
}

std::vector<double> Ilu0Factorization::apply_inverse(std::span<const double> r) const {
  const Index n = size();
  check_size(r.size(), n, "ilu0 apply_inverse");
  std::vector<double> y(n);
  for (Index i = 0; i < n; ++i) {
    double acc = r[ordering_.vertex_at(i)];
    for (std::size_t p = row_ptr_[i]; p < diag_pos_[i]; ++p) acc -= vals_[p] * y[cols_[p]];
    y[i] = acc;
  }
  for (Index i = n; i-- > 0;) {
    double acc = y[i];
    for (std::size_t p = diag_pos_[i] + 1; p < row_ptr_[i + 1]; ++p) acc -= vals_[p] * y[cols_[p]];
    y[i] = acc / vals_[diag_pos_[i]];
  }
  std::vector<double> z(n);
  for (Index i = 0; i < n; ++i) z[ordering_.vertex_at(i)] = y[i];
  return z;
}

std::vector<double> Ilu0Factorization::apply(std::span<const double> v) const {
  const Index n = size();
  check_size(v.size(), n, "ilu0 apply");
  std::vector<double> w(n);
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t p = diag_pos_[i]; p < row_ptr_[i + 1]; ++p) acc += vals_[p] * v[ordering_.vertex_at(cols_[p])];
    w[i] = acc;
  }
  std::vector<double> out(n);
  for (Index i = 0; i < n; ++i) {
    double acc = w[i];
    for (std::size_t p = row_ptr_[i]; p < diag_pos_[i]; ++p) acc += vals_[p] * w[cols_[p]];
    out[ordering_.vertex_at(i)] = acc;
  }
  return out;
}

DenseMatrix Ilu0Factorization::densify() const {
  return densify_operator(size(), [&](const std::vector<double>& v) { return apply(v); });
}

// ---------------------------------------------------------------- wrapper

const char* to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::Identity: return "none";
    case PreconditionerKind::Jacobi: return "jacobi";
    case PreconditionerKind::Ilu0: return "ilu0";
    case PreconditionerKind::Milu: return "milu";
  }
  return "unknown";
}

PreconditionerKind preconditioner_kind_from_string(const std::string& name) {
  if (name == "none" || name == "identity") return PreconditionerKind::Identity;
  if (name == "jacobi") return PreconditionerKind::Jacobi;
  if (name == "ilu0" || name == "ilu") return PreconditionerKind::Ilu0;
  if (name == "milu") return PreconditionerKind::Milu;
  throw Error(ErrorCode::InvalidArgument, "unknown preconditioner '" + name + "'");
}

Preconditioner Preconditioner::identity(Index n) { return {n, IdentityOp{}}; }

Preconditioner Preconditioner::jacobi(const SpdMSystem& a) {
  JacobiOp op;
  op.diagonal.assign(a.diagonal().begin(), a.diagonal().end());
  for (Index k = 0; k < a.size(); ++k) {
    if (!(op.diagonal[k] > 0.0)) {
      throw Error(ErrorCode::NonPositivePivot, "zero diagonal in Jacobi preconditioner",
                  "vertex " + std::to_string(k));
    }
  }
  return {a.size(), std::move(op)};
}

Preconditioner Preconditioner::ilu0(const SpdMSystem& a, const VertexOrdering& ord) {
  return {a.size(), std::make_shared<const Ilu0Factorization>(ilu0_factor(a, ord))};
}

Preconditioner Preconditioner::milu(const SpdMSystem& a, const VertexOrdering& ord) {
  return {a.size(), std::make_shared<const MiluFactorization>(milu_factor(a, ord))};
}

Preconditioner Preconditioner::make(PreconditionerKind kind, const SpdMSystem& a,
                                    const VertexOrdering& ord) {
  switch (kind) {
    case PreconditionerKind::Identity: return identity(a.size());
    case PreconditionerKind::Jacobi: return jacobi(a);
    case PreconditionerKind::Ilu0: return ilu0(a, ord);
    case PreconditionerKind::Milu: return milu(a, ord);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preconditioner kind");
}

PreconditionerKind Preconditioner::kind() const noexcept {
  switch (impl_.index()) {
    case 0: return PreconditionerKind::Identity;
    case 1: return PreconditionerKind::Jacobi;
    case 2: return PreconditionerKind::Ilu0;
    default: return PreconditionerKind::Milu;
  }
}

std::vector<double> Preconditioner::apply_inverse(std::span<const double> r) const {
  check_size(r.size(), n_, "preconditioner apply_inverse");
  if (std::holds_alternative<IdentityOp>(impl_)) return {r.begin(), r.end()};
  if (const auto* j = std::get_if<JacobiOp>(&impl_)) {
    std::vector<double> z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / j->diagonal[i];
    return z;
  }
  if (const auto* f = std::get_if<std::shared_ptr<const Ilu0Factorization>>(&impl_)) {
    return (*f)->apply_inverse(r);
  }
  return std::get<std::shared_ptr<const MiluFactorization>>(impl_)->apply_inverse(r);
}

std::vector<double> Preconditioner::apply(std::span<const double> v) const {
  check_size(v.size(), n_, "preconditioner apply");
  if (std::holds_alternative<IdentityOp>(impl_)) return {v.begin(), v.end()};
  if (const auto* j = std::get_if<JacobiOp>(&impl_)) {
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = v[i] * j->diagonal[i];
    return z;
  }
  if (const auto* f = std::get_if<std::shared_ptr<const Ilu0Factorization>>(&impl_)) {
    return (*f)->apply(v);
  }
  return std::get<std::shared_ptr<const MiluFactorization>>(impl_)->apply(v);
}

DenseMatrix Preconditioner::densify() const {
  return densify_operator(n_, [&](const std::vector<double>& v) { return apply(v); });
}

const MiluFactorization* Preconditioner::milu_factorization() const noexcept {
  if (const auto* f = std::get_if<std::shared_ptr<const MiluFactorization>>(&impl_)) return f->get();
  return nullptr;
}

}  // namespace milu
