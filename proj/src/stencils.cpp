#include "milu/stencils.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "milu/error.hpp"

namespace milu {

namespace {

std::vector<double> parse_args(const std::string& inner) {
  std::vector<double> out;
  std::stringstream ss(inner);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad numeric domain argument '" + tok + "'");
    }
  }
  return out;
}

// Root of phi on the segment node -> end (length h), without the lower clamp.
double crossing_distance(const std::function<double(const Point&)>& phi, const Point& node,
                         const Point& end, double h) {
  auto at = [&](double t) {
    if (t == h) return phi(end);
    Point p = node;
    for (int ax = 0; ax < 3; ++ax) p[ax] += (end[ax] - node[ax]) * (t / h);
    return phi(p);
  };
  const double f0 = at(0.0);
  const double f1 = at(h);
  if (!(f0 < 0.0) || !(f1 >= 0.0)) {
    throw Error(ErrorCode::NoSignChange, "level set does not change sign along the grid line");
  }
  if (f1 == 0.0) return h;
  double lo = 0.0;
  double hi = h;
  const double tol = 1e-12 * h;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ImplicitDomain ImplicitDomain::box(int dim, const Point& lo, const Point& hi) {
  ImplicitDomain d;
  d.name = "box";
  d.is_box = true;
  d.phi = [dim, lo, hi](const Point& x) {
    double v = -std::numeric_limits<double>::infinity();
    for (int ax = 0; ax < dim; ++ax) v = std::max({v, lo[ax] - x[ax], x[ax] - hi[ax]});
    return v;
  };
  return d;
}

ImplicitDomain ImplicitDomain::disk(double cx, double cy, double r) {
  ImplicitDomain d;
  d.name = "disk";
  d.phi = [cx, cy, r](const Point& x) {
    const double dx = x[0] - cx;
    const double dy = x[1] - cy;
    return dx * dx + dy * dy - r * r;
  };
  return d;
}

ImplicitDomain ImplicitDomain::sphere(double cx, double cy, double cz, double r) {
  ImplicitDomain d;
  d.name = "sphere";
  d.phi = [cx, cy, cz, r](const Point& x) {
    const double dx = x[0] - cx;
    const double dy = x[1] - cy;
    const double dz = x[2] - cz;
    return dx * dx + dy * dy + dz * dz - r * r;
  };
  return d;
}

ImplicitDomain domain_from_name(const std::string& spec, const UniformGridSpec& grid) {
  static const std::regex call(R"(\s*([a-z]+)\s*(?:\((.*)\))?\s*)");
  std::smatch m;
  if (!std::regex_match(spec, m, call)) {
    throw Error(ErrorCode::InvalidArgument, "unrecognized domain '" + spec + "'");
  }
  const std::string name = m[1];
  const auto args = m[2].matched ? parse_args(m[2]) : std::vector<double>{};
  if (name == "box" && args.empty()) {
    Point lo = grid.origin;
    Point hi = grid.node({grid.extents[0] - 1, grid.extents[1] - 1, grid.extents[2] - 1});
    return ImplicitDomain::box(grid.dim, lo, hi);
  }
  if (name == "disk" && args.size() == 3) return ImplicitDomain::disk(args[0], args[1], args[2]);
  if (name == "sphere" && args.size() == 4) {
    return ImplicitDomain::sphere(args[0], args[1], args[2], args[3]);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown domain or wrong argument count: '" + spec + "'");
}

double UniformGridSpec::longest_side() const {
  int longest = 0;
  for (int ax = 0; ax < dim; ++ax) longest = std::max(longest, extents[ax] - 1);
  return longest * h;
}

UniformGridSpec UniformGridSpec::unit(int dim, int cells) {
  if (dim != 2 && dim != 3) throw Error(ErrorCode::InvalidDimension, "grid dimension must be 2 or 3");
  if (cells < 1) throw Error(ErrorCode::InvalidArgument, "need at least one cell per axis");
  UniformGridSpec g;
  g.dim = dim;
  g.h = 1.0 / cells;
  g.extents = {cells + 1, cells + 1, dim == 3 ? cells + 1 : 1};
  g.domain = ImplicitDomain::box(dim, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  return g;
}

double boundary_distance(const std::function<double(const Point&)>& phi, const Point& node,
                         int axis, int side, double h) {
  Point end = node;
  end[axis] += side * h;
  const double t = crossing_distance(phi, node, end, h);
  return std::clamp(t, kDegenerateCutFraction * h, h);
}

GibouResult gibou_matrix(const UniformGridSpec& spec) {
  if (spec.dim != 2 && spec.dim != 3) {
    throw Error(ErrorCode::InvalidDimension, "gibou matrix needs d = 2 or 3");
  }
  if (!(spec.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid size must be positive");
  if (!spec.domain.phi) throw Error(ErrorCode::InvalidArgument, "grid spec has no domain");
  const GridPoint ext{spec.extents[0], spec.extents[1], spec.dim == 3 ? spec.extents[2] : 1};
  const std::size_t total = static_cast<std::size_t>(ext[0]) * ext[1] * ext[2];
  auto linear = [&](const GridPoint& p) {
    return (static_cast<std::size_t>(p[2]) * ext[1] + p[1]) * ext[0] + p[0];
  };

  GibouResult out;
  GridSystem& g = out.grid;
  g.dim = spec.dim;
  g.h = spec.h;
  g.extents = ext;
  std::vector<Index> id(total, -1);
  for (int z = 0; z < ext[2]; ++z)
    for (int y = 0; y < ext[1]; ++y)
      for (int x = 0; x < ext[0]; ++x) {
        const GridPoint p{x, y, z};
        if (spec.domain.phi(spec.node(p)) < 0.0) {
          id[linear(p)] = static_cast<Index>(g.coords.size());
          g.coords.push_back(p);
        }
      }
  if (g.coords.empty()) throw Error(ErrorCode::EmptyDomain, "no grid node lies inside the domain");

  const auto n = static_cast<Index>(g.coords.size());
  const double inv_h2 = 1.0 / (spec.h * spec.h);
  std::vector<WeightedEdge> edges;
  std::vector<double> slack(n, 0.0);
  out.boundary.cuts.resize(n);
  for (Index k = 0; k < n; ++k) {
    const GridPoint& p = g.coords[k];
    for (int ax = 0; ax < spec.dim; ++ax) {
      for (int side : {-1, 1}) {
        GridPoint q = p;
        q[ax] += side;
        const bool in_array = q[ax] >= 0 && q[ax] < ext[ax];
        if (in_array && id[linear(q)] >= 0) {
          if (id[linear(q)] > k) edges.push_back({k, id[linear(q)], inv_h2});
          continue;
        }
        if (!in_array && spec.domain.phi(spec.node(q)) < 0.0) {
          throw Error(ErrorCode::InvalidArgument, "domain extends beyond the grid");
        }
        const double dist = crossing_distance(spec.domain.phi, spec.node(p), spec.node(q), spec.h);
        if (dist < kDegenerateCutFraction * spec.h) {
          throw Error(ErrorCode::DegenerateCut, "interface nearly grazes a grid node",
                      "vertex " + std::to_string(k));
        }
        out.boundary.cuts[k].push_back({ax, side, dist});
        slack[k] += 1.0 / (dist * spec.h);
      }
    }
  }
  g.system = SpdMSystem::assemble(n, edges, slack);
  return out;
}

// ---------------------------------------------------------------- wide stencils

WideStencilScheme WideStencilScheme::make(WideScheme id) {
  WideStencilScheme s;
  s.id = id;
  switch (id) {
    case WideScheme::Ifd11:
      s.name = "ifd11";
      s.m = 1;
      s.c = {-2.0, 1.0};
      s.b = 1.0 / 12.0;
      s.d = 0.0;
      break;
    case WideScheme::Ifd22:
      s.name = "ifd22";
      s.m = 2;
      s.c = {-17.0 / 10.0, 4.0 / 5.0, 1.0 / 20.0};
      s.b = 2.0 / 15.0;
      s.d = 0.0;
      break;
    case WideScheme::Hifd22:
      s.name = "hifd22";
      s.m = 2;
      s.c = {-53.0 / 42.0, 32.0 / 63.0, 31.0 / 252.0};
      s.b = 13.0 / 63.0;
      s.d = 1.0 / 164.0;
      break;
  }
  return s;
}

WideStencilScheme WideStencilScheme::from_name(const std::string& name) {
  if (name == "ifd11") return make(WideScheme::Ifd11);
  if (name == "ifd22") return make(WideScheme::Ifd22);
  if (name == "hifd22") return make(WideScheme::Hifd22);
  throw Error(ErrorCode::InvalidArgument, "unknown wide-stencil scheme '" + name + "'");
}

std::array<double, 5> stencil_vector(const WideStencilScheme& s) {
  return {s.d, s.b - 4.0 * s.d, 1.0 - 2.0 * s.b + 6.0 * s.d, s.b - 4.0 * s.d, s.d};
}

double wide_stencil_weight(const WideStencilScheme& scheme, int p, int q) {
  const auto v = stencil_vector(scheme);
  auto vv = [&](int t) { return (t < -2 || t > 2) ? 0.0 : v[t + 2]; };
  return scheme.coefficient(p) * vv(q) + vv(p) * scheme.coefficient(q);
}

GridSystem ifd_matrix(const WideStencilScheme& scheme, const UniformGridSpec& spec) {
  if (spec.dim != 2) throw Error(ErrorCode::InvalidDimension, "wide-stencil schemes are 2D");
  if (!spec.domain.is_box) {
    throw Error(ErrorCode::InvalidArgument, "wide-stencil schemes need a box domain");
  }
  const int nx = spec.extents[0] - 2;
  const int ny = spec.extents[1] - 2;
  if (nx < 2 * scheme.m + 1 || ny < 2 * scheme.m + 1) {
    throw Error(ErrorCode::GridTooSmall, "grid too small for the stencil half-width",
                "interior " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  const int reach = std::max(scheme.m, 2);
  const double inv_h2 = 1.0 / (spec.h * spec.h);
  for (int p = -reach; p <= reach; ++p)
    for (int q = -reach; q <= reach; ++q) {
      if ((p != 0 || q != 0) && wide_stencil_weight(scheme, p, q) < 0.0) {
        throw Error(ErrorCode::NotAnMMatrix, "stencil produces a positive off-diagonal entry",
                    scheme.name + " offset (" + std::to_string(p) + "," + std::to_string(q) + ")");
      }
    }
  if (!(wide_stencil_weight(scheme, 0, 0) < 0.0)) {
    throw Error(ErrorCode::NotAnMMatrix, "stencil center has the wrong sign", scheme.name);
  }

  GridSystem g;
  g.dim = 2;
  g.h = spec.h;
  g.extents = {spec.extents[0], spec.extents[1], 1};
  auto vertex = [nx](int i, int j) { return static_cast<Index>((j - 1) * nx + (i - 1)); };
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) g.coords.push_back({i, j, 0});

  const auto n = static_cast<Index>(g.coords.size());
  std::vector<WeightedEdge> edges;
  std::vector<double> slack(n, 0.0);
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const Index k = vertex(i, j);
      for (int q = -reach; q <= reach; ++q)
        for (int p = -reach; p <= reach; ++p) {
          if (p == 0 && q == 0) continue;
          const double w = wide_stencil_weight(scheme, p, q) * inv_h2;
          if (w == 0.0) continue;
          const int ii = i + p;
          const int jj = j + q;
          if (ii >= 1 && ii <= nx && jj >= 1 && jj <= ny) {
            const Index other = vertex(ii, jj);
            if (other > k) edges.push_back({k, other, w});
          } else {
            slack[k] += w;  // Dirichlet node eliminated to the right-hand side
          }
        }
    }
  g.system = SpdMSystem::assemble(n, edges, slack);
  return g;
}

}  // namespace milu
