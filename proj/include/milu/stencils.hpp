#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "milu/graph_system.hpp"
#include "milu/ordering.hpp"

namespace milu {

using Point = std::array<double, 3>;

/// Level-set description of a domain: phi < 0 strictly inside.
struct ImplicitDomain {
  std::string name;
  std::function<double(const Point&)> phi;
  bool is_box = false;

  /// Open box (lo, hi) on the first `dim` axes.
  static ImplicitDomain box(int dim, const Point& lo, const Point& hi);
  static ImplicitDomain disk(double cx, double cy, double r);
  static ImplicitDomain sphere(double cx, double cy, double cz, double r);
};

/// Registry lookup: `box`, `disk(cx,cy,r)`, `sphere(cx,cy,cz,r)`. `box`
/// resolves to the grid's bounding box, so it needs the grid spec.
struct UniformGridSpec;
ImplicitDomain domain_from_name(const std::string& spec, const UniformGridSpec& grid);

/// Uniform grid of nodes origin + index*h, index in [0, extents) per axis.
struct UniformGridSpec {
  int dim = 2;
  GridPoint extents{1, 1, 1};
  double h = 1.0;
  Point origin{0.0, 0.0, 0.0};
  ImplicitDomain domain;

  Point node(const GridPoint& idx) const {
    return {origin[0] + idx[0] * h, origin[1] + idx[1] * h, origin[2] + idx[2] * h};
  }
  /// Length of the longest side of the grid's bounding box.
  double longest_side() const;

  /// Grid on the unit square/cube with `cells` intervals per axis, h = 1/cells.
  /// Defaults to the whole open box as domain.
  static UniformGridSpec unit(int dim, int cells);
};

/// A system assembled on grid nodes, with the grid index of every vertex.
/// Vertices are numbered in lexicographic (last-axis-major) node order.
struct GridSystem {
  SpdMSystem system;
  std::vector<GridPoint> coords;
  GridPoint extents{1, 1, 1};
  int dim = 2;
  double h = 1.0;
};

struct BoundaryCut {
  int axis = 0;
  int side = 1;  // +1 or -1
  double distance = 0.0;
};

/// For each vertex, the grid directions whose neighbor lies outside the
/// domain together with the distance to the interface along that line.
struct GibouBoundaryInfo {
  std::vector<std::vector<BoundaryCut>> cuts;
};

struct GibouResult {
  GridSystem grid;
  GibouBoundaryInfo boundary;
};

inline constexpr double kDegenerateCutFraction = 1e-8;

/// Cut-cell Dirichlet Poisson matrix: weight h^-2 between adjacent interior
/// nodes, slack sum over cut directions of 1/(h_cut * h).
GibouResult gibou_matrix(const UniformGridSpec& spec);

/// Distance from `node` (inside) to the interface along `axis`/`side`, found
/// by bisection to 1e-12*h and clamped to (eps*h, h].
double boundary_distance(const std::function<double(const Point&)>& phi, const Point& node,
                         int axis, int side, double h);

enum class WideScheme { Ifd11, Ifd22, Hifd22 };

/// Implicit/high-order implicit finite difference coefficients:
/// c_0..c_m (c_{-n} = c_n), b, d.
struct WideStencilScheme {
  WideScheme id = WideScheme::Ifd11;
  std::string name;
  int m = 1;
  std::vector<double> c;
  double b = 0.0;
  double d = 0.0;

  double coefficient(int s) const {
    const int a = s < 0 ? -s : s;
    return a <= m ? c[a] : 0.0;
  }
  static WideStencilScheme make(WideScheme id);
  static WideStencilScheme from_name(const std::string& name);
};

/// Inner stencil v = [d, b-4d, 1-2b+6d, b-4d, d].
std::array<double, 5> stencil_vector(const WideStencilScheme& scheme);

/// Offset weight W(p,q) = c_p v_q + v_p c_q of the Laplacian form; A uses -W/h^2.
double wide_stencil_weight(const WideStencilScheme& scheme, int p, int q);

/// Wide-stencil 2D matrix on the interior nodes of a box grid. Nodes falling
/// outside the rectangle are Dirichlet-eliminated into the slack.
GridSystem ifd_matrix(const WideStencilScheme& scheme, const UniformGridSpec& spec);

}  // namespace milu
