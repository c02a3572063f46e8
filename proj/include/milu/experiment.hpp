#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "milu/adaptive_tree.hpp"
#include "milu/graph_system.hpp"
#include "milu/lecn.hpp"
#include "milu/ordering.hpp"
#include "milu/preconditioners.hpp"

namespace milu {

enum class Builder { Gibou2d, Gibou3d, Ifd11, Ifd22, Hifd22, QuadtreeFvm, OctreeFvm };
enum class OrderingChoice { Lex, Sector, Tree };

const char* to_string(Builder b);
const char* to_string(OrderingChoice o);
bool is_tree_builder(Builder b);

/// Raised for configuration problems (unknown keys, bad values, incompatible
/// choices); the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sweep point. `label` is printed in the `param` column; `value` is the
/// number of cells per unit length (Gibou), interior nodes per axis (IFD) or
/// refinement depth (trees).
struct SweepPoint {
  std::string label;
  int value = 0;
};

struct ExperimentConfig {
  Builder builder = Builder::Gibou2d;
  OrderingChoice ordering = OrderingChoice::Lex;
  std::vector<PreconditionerKind> preconditioners{PreconditionerKind::Milu};
  std::vector<SweepPoint> sweep;
  std::string sigma = "one";
  std::string domain = "box";
  std::uint64_t seed = 42;
  /// Random-tree depth; deeper sweep points uniformly refine that base tree.
  int max_depth = 3;
  double refine_prob = 0.5;
  /// Root grid cells per axis for tree builders (unit square/cube).
  int root_cells = 2;
  /// Power/inverse iteration tolerance.
  double tol = 1e-6;
  double pcg_tol = 1e-14;
  std::string output;
  int jobs = 1;
};

/// Validates and converts a JSON object with keys builder, ordering, precond,
/// h, n, depths, sigma, domain, seed, max_depth, refine_prob, root_cells,
/// tol, pcg_tol, output, jobs. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Parses "1/32", "0.125", "3..7", "16,32,64" style sweep lists.
std::vector<SweepPoint> parse_h_list(const std::string& text);
std::vector<SweepPoint> parse_int_list(const std::string& text);

struct BuiltSystem {
  SpdMSystem system;
  VertexOrdering ordering;
  std::vector<GridPoint> coords;  // empty for trees
  GridPoint extents{1, 1, 1};
  int dim = 2;
  double h_bar = 0.0;
  /// Closed-form LECN bound when one exists for this builder/ordering.
  std::optional<double> theoretical_bound;
  std::optional<AdaptiveTree> tree;
};

BuiltSystem build_system(const ExperimentConfig& c, const SweepPoint& point);

struct ExperimentRow {
  std::string param;
  Index n_vertices = 0;
  double h_bar = 0.0;
  double kappa_a = 0.0;
  double kappa_precond = 0.0;
  double max_tau = 0.0;
  std::optional<double> theoretical_bound;
  std::vector<double> kappa;      // per preconditioner, config order
  std::vector<Index> pcg_iters;   // per preconditioner, config order
};

/// Runs one sweep point. Throws Error(InvalidSystem) when the MILU estimate
/// exceeds max tau beyond the eigen-solver tolerance.
ExperimentRow run_point(const ExperimentConfig& c, const SweepPoint& point);
/// All sweep points, `jobs` worker threads, rows in sweep order.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& c);
void write_experiment_csv(std::ostream& out, const ExperimentConfig& c,
                          const std::vector<ExperimentRow>& rows);

/// Seeded right-hand side with entries uniform in [-1, 1].
std::vector<double> random_rhs(Index n, std::uint64_t seed);

}  // namespace milu
