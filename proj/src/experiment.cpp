#include "milu/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <ostream>
#include <random>
#include <thread>

#include "milu/error.hpp"
#include "milu/krylov.hpp"
#include "milu/stencils.hpp"

namespace milu {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

long long parse_integer(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

// A JSON sweep value may be a string, a number or an array of either.
std::string list_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& e : v) {
      if (!e.is_string() && !e.is_number()) throw ConfigError("'" + key + "' entries must be scalars");
      if (!out.empty()) out += ',';
      out += e.is_string() ? e.get<std::string>() : e.dump();
    }
    return out;
  }
  throw ConfigError("'" + key + "' must be a string, number or array");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* to_string(Builder b) {
  switch (b) {
    case Builder::Gibou2d: return "gibou2d";
    case Builder::Gibou3d: return "gibou3d";
    case Builder::Ifd11: return "ifd11";
    case Builder::Ifd22: return "ifd22";
    case Builder::Hifd22: return "hifd22";
    case Builder::QuadtreeFvm: return "quadtree_fvm";
    case Builder::OctreeFvm: return "octree_fvm";
  }
  return "?";
}

const char* to_string(OrderingChoice o) {
  switch (o) {
    case OrderingChoice::Lex: return "lex";
    case OrderingChoice::Sector: return "sector";
    case OrderingChoice::Tree: return "tree";
  }
  return "?";
}

bool is_tree_builder(Builder b) { return b == Builder::QuadtreeFvm || b == Builder::OctreeFvm; }

std::vector<SweepPoint> parse_h_list(const std::string& text) {
  std::vector<SweepPoint> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) throw ConfigError("empty entry in h list");
    double cells = 0.0;
    if (const auto slash = item.find('/'); slash != std::string::npos) {
      const long long num = parse_integer(trim(item.substr(0, slash)));
      const long long den = parse_integer(trim(item.substr(slash + 1)));
      if (num <= 0 || den <= 0 || den % num != 0) {
        throw ConfigError("h must be 1/k for a positive integer k: '" + item + "'");
      }
      cells = static_cast<double>(den / num);
    } else {
      const double h = parse_double(item);
      if (!(h > 0.0)) throw ConfigError("h must be positive: '" + item + "'");
      cells = std::round(1.0 / h);
      if (std::abs(cells * h - 1.0) > 1e-9) {
        throw ConfigError("h must divide the unit interval: '" + item + "'");
      }
    }
    if (cells < 1 || cells > 1 << 20) throw ConfigError("h out of range: '" + item + "'");
    out.push_back({item, static_cast<int>(cells)});
  }
  return out;
}

std::vector<SweepPoint> parse_int_list(const std::string& text) {
  std::vector<SweepPoint> out;
  for (const auto& item : split(text, ',')) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const long long lo = parse_integer(trim(item.substr(0, dots)));
      const long long hi = parse_integer(trim(item.substr(dots + 2)));
      if (hi < lo || hi - lo > 1000) throw ConfigError("bad range '" + item + "'");
      for (long long v = lo; v <= hi; ++v) out.push_back({std::to_string(v), static_cast<int>(v)});
    } else {
      const long long v = parse_integer(item);
      out.push_back({std::to_string(v), static_cast<int>(v)});
    }
  }
  return out;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::vector<std::string> known{
      "builder", "ordering", "precond",     "h",          "n",   "depths",  "sigma", "domain",
      "seed",    "max_depth", "refine_prob", "root_cells", "tol", "pcg_tol", "output", "jobs"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  auto get_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  auto get_int = [&](const char* key, long long lo, long long hi) -> std::optional<long long> {
    if (!j.contains(key)) return std::nullopt;
    long long v = 0;
    if (j[key].is_number_integer()) {
      v = j[key].get<long long>();
    } else if (j[key].is_string()) {
      v = parse_integer(j[key].get<std::string>());
    } else {
      throw ConfigError(std::string("'") + key + "' must be an integer");
    }
    if (v < lo || v > hi) throw ConfigError(std::string("'") + key + "' out of range");
    return v;
  };
  auto get_double = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key)) return std::nullopt;
    if (j[key].is_number()) return j[key].get<double>();
    if (j[key].is_string()) return parse_double(j[key].get<std::string>());
    throw ConfigError(std::string("'") + key + "' must be a number");
  };

  ExperimentConfig c;
  const auto builder = get_string("builder");
  if (!builder) throw ConfigError("'builder' is required");
  static const std::vector<Builder> builders{Builder::Gibou2d, Builder::Gibou3d, Builder::Ifd11,
                                             Builder::Ifd22,   Builder::Hifd22,  Builder::QuadtreeFvm,
                                             Builder::OctreeFvm};
  bool found = false;
  for (auto b : builders)
    if (*builder == to_string(b)) {
      c.builder = b;
      found = true;
    }
  if (!found) throw ConfigError("unknown builder '" + *builder + "'");

  const auto ordering = get_string("ordering");
  if (!ordering) {
    c.ordering = is_tree_builder(c.builder) ? OrderingChoice::Tree : OrderingChoice::Lex;
  } else if (*ordering == "lex") {
    c.ordering = OrderingChoice::Lex;
  } else if (*ordering == "sector") {
    c.ordering = OrderingChoice::Sector;
  } else if (*ordering == "tree") {
    c.ordering = OrderingChoice::Tree;
  } else {
    throw ConfigError("unknown ordering '" + *ordering + "'");
  }
  if ((c.ordering == OrderingChoice::Tree) != is_tree_builder(c.builder)) {
    throw ConfigError("the tree ordering is required for, and only valid with, tree builders");
  }

  if (j.contains("precond")) {
    c.preconditioners.clear();
    for (const auto& name : split(list_text(j["precond"], "precond"), ',')) {
      try {
        const auto kind = preconditioner_kind_from_string(name);
        if (std::find(c.preconditioners.begin(), c.preconditioners.end(), kind) ==
            c.preconditioners.end()) {
          c.preconditioners.push_back(kind);
        }
      } catch (const Error&) {
        throw ConfigError("unknown preconditioner '" + name + "'");
      }
    }
  }

  const bool tree = is_tree_builder(c.builder);
  const bool ifd = c.builder == Builder::Ifd11 || c.builder == Builder::Ifd22 ||
                   c.builder == Builder::Hifd22;
  if (tree) {
    if (j.contains("h") || j.contains("n")) throw ConfigError("tree builders sweep 'depths'");
    if (j.contains("depths")) c.sweep = parse_int_list(list_text(j["depths"], "depths"));
    for (const auto& p : c.sweep)
      if (p.value < 0 || p.value > 12) throw ConfigError("depth out of range: " + p.label);
  } else {
    if (j.contains("depths")) throw ConfigError("'depths' only applies to tree builders");
    if (j.contains("h") && j.contains("n")) throw ConfigError("give either 'h' or 'n', not both");
    if (j.contains("n")) {
      if (!ifd) throw ConfigError("'n' only applies to wide-stencil builders");
      c.sweep = parse_int_list(list_text(j["n"], "n"));
      for (const auto& p : c.sweep)
        if (p.value < 1 || p.value > 4096) throw ConfigError("n out of range: " + p.label);
    } else if (j.contains("h")) {
      c.sweep = parse_h_list(list_text(j["h"], "h"));
      if (ifd) {
        // Wide stencils are swept by interior count n = 1/h - 1.
        for (auto& p : c.sweep) p.value -= 1;
      }
    }
  }
  if (c.sweep.empty()) throw ConfigError("the sweep is empty");

  if (auto s = get_string("sigma")) c.sigma = *s;
  try {
    scalar_field_from_name(c.sigma);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (auto s = get_string("domain")) c.domain = *s;
  try {
    domain_from_name(c.domain, UniformGridSpec::unit(2, 2));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (ifd && c.domain != "box") throw ConfigError("wide-stencil builders need the box domain");
  if (tree && c.domain != "box") throw ConfigError("tree builders use the unit square/cube");

  if (j.contains("seed")) {
    if (j["seed"].is_number_unsigned()) {
      c.seed = j["seed"].get<std::uint64_t>();
    } else {
      c.seed = static_cast<std::uint64_t>(*get_int("seed", 0, std::numeric_limits<long long>::max()));
    }
  }
  if (auto v = get_int("max_depth", 0, 12)) c.max_depth = static_cast<int>(*v);
  if (auto v = get_double("refine_prob")) c.refine_prob = *v;
  if (!(c.refine_prob >= 0.0 && c.refine_prob <= 1.0)) {
    throw ConfigError("'refine_prob' must lie in [0, 1]");
  }
  if (auto v = get_int("root_cells", 1, 64)) c.root_cells = static_cast<int>(*v);
  if (auto v = get_double("tol")) c.tol = *v;
  if (auto v = get_double("pcg_tol")) c.pcg_tol = *v;
  if (!(c.tol > 0.0 && c.tol < 1.0) || !(c.pcg_tol > 0.0 && c.pcg_tol < 1.0)) {
    throw ConfigError("tolerances must lie in (0, 1)");
  }
  if (auto s = get_string("output")) c.output = *s;
  if (auto v = get_int("jobs", 1, 256)) c.jobs = static_cast<int>(*v);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  std::vector<std::string> pre;
  for (auto p : c.preconditioners) pre.emplace_back(to_string(p));
  std::vector<std::string> sweep;
  for (const auto& p : c.sweep) sweep.push_back(p.label);
  const char* sweep_key = is_tree_builder(c.builder) ? "depths" : "h";
  if (c.builder == Builder::Ifd11 || c.builder == Builder::Ifd22 || c.builder == Builder::Hifd22) {
    sweep.clear();
    for (const auto& p : c.sweep) sweep.push_back(std::to_string(p.value));
    sweep_key = "n";
  }
  return {{"builder", to_string(c.builder)},
          {"ordering", to_string(c.ordering)},
          {"precond", pre},
          {sweep_key, sweep},
          {"sigma", c.sigma},
          {"domain", c.domain},
          {"seed", c.seed},
          {"max_depth", c.max_depth},
          {"refine_prob", c.refine_prob},
          {"root_cells", c.root_cells},
          {"tol", c.tol},
          {"pcg_tol", c.pcg_tol},
          {"output", c.output},
          {"jobs", c.jobs}};
}

BuiltSystem build_system(const ExperimentConfig& c, const SweepPoint& point) {
  BuiltSystem out;
  switch (c.builder) {
    case Builder::Gibou2d:
    case Builder::Gibou3d: {
      const int dim = c.builder == Builder::Gibou2d ? 2 : 3;
      auto spec = UniformGridSpec::unit(dim, point.value);
      spec.domain = domain_from_name(c.domain, spec);
      auto g = gibou_matrix(spec).grid;
      out.system = std::move(g.system);
      out.coords = std::move(g.coords);
      out.extents = g.extents;
      out.dim = dim;
      out.h_bar = spec.h;
      const auto kind = c.ordering == OrderingChoice::Lex ? OrderKind::Lexicographic : OrderKind::Sector;
      out.theoretical_bound = theoretical_bound(kind, dim, spec.longest_side(), spec.h);
      break;
    }
    case Builder::Ifd11:
    case Builder::Ifd22:
    case Builder::Hifd22: {
      const auto scheme = WideStencilScheme::from_name(to_string(c.builder));
      const auto spec = UniformGridSpec::unit(2, point.value + 1);
      auto g = ifd_matrix(scheme, spec);
      out.system = std::move(g.system);
      out.coords = std::move(g.coords);
      out.extents = g.extents;
      out.dim = 2;
      out.h_bar = spec.h;
      break;
    }
    case Builder::QuadtreeFvm:
    case Builder::OctreeFvm: {
      const int dim = c.builder == Builder::QuadtreeFvm ? 2 : 3;
      const GridPoint ext{c.root_cells, c.root_cells, dim == 3 ? c.root_cells : 1};
      const int base_depth = std::min(c.max_depth, point.value);
      auto tree = AdaptiveTree::random_tree(dim, ext, base_depth, c.refine_prob, c.seed,
                                            1.0 / c.root_cells);
      for (int k = base_depth; k < point.value; ++k) tree.uniform_refine();
      out.system = fvm_matrix(tree, scalar_field_from_name(c.sigma));
      out.ordering = tree_order(tree);
      out.dim = dim;
      out.h_bar = tree.smallest_cell();
      out.tree = std::move(tree);
      return out;
    }
  }
  out.ordering = c.ordering == OrderingChoice::Lex ? lexicographic_order(out.coords)
                                                   : sector_order(out.coords, out.extents);
  return out;
}

std::vector<double> random_rhs(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  return v;
}

ExperimentRow run_point(const ExperimentConfig& c, const SweepPoint& point) {
  const auto built = build_system(c, point);
  const auto& a = built.system;
  ExperimentRow row;
  row.param = point.label;
  row.n_vertices = a.size();
  row.h_bar = built.h_bar;
  row.theoretical_bound = built.theoretical_bound;

  const auto milu = Preconditioner::milu(a, built.ordering);
  row.max_tau = tau_direct(a, *milu.milu_factorization()).max_tau;

  EigenOptions opts;
  opts.tol = c.tol;
  opts.seed = c.seed;
  opts.inner = &milu;  // inner solves only need an SPD preconditioner
  row.kappa_a = condition_number(a, Preconditioner::identity(a.size()), opts).kappa;

  const auto rhs = random_rhs(a.size(), c.seed);
  PcgOptions pcg_opts;
  pcg_opts.tol = c.pcg_tol;
  std::size_t precond_column = 0;
  for (std::size_t i = 0; i < c.preconditioners.size(); ++i) {
    const auto kind = c.preconditioners[i];
    if (kind == PreconditionerKind::Milu) precond_column = i;
    const auto p = kind == PreconditionerKind::Milu ? milu : Preconditioner::make(kind, a, built.ordering);
    row.kappa.push_back(kind == PreconditionerKind::Identity ? row.kappa_a
                                                             : condition_number(a, p, opts).kappa);
    row.pcg_iters.push_back(pcg(a, rhs, p, pcg_opts).iterations);
  }
  row.kappa_precond = row.kappa[precond_column];
  // Both eigen-estimates are converged only to `tol`, so allow that much slack.
  const bool milu_listed = std::find(c.preconditioners.begin(), c.preconditioners.end(),
                                     PreconditionerKind::Milu) != c.preconditioners.end();
  if (milu_listed && row.kappa_precond > row.max_tau * (1.0 + 10.0 * c.tol)) {
    throw Error(ErrorCode::InvalidSystem, "estimated kappa(M^-1 A) exceeds max tau",
                "param " + row.param + ": kappa " + fmt(row.kappa_precond) + " > " +
                    fmt(row.max_tau));
  }
  return row;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& c) {
  const std::size_t count = c.sweep.size();
  std::vector<ExperimentRow> rows(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        rows[i] = run_point(c, c.sweep[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(c.jobs, static_cast<int>(count)));
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_experiment_csv(std::ostream& out, const ExperimentConfig& c,
                          const std::vector<ExperimentRow>& rows) {
  out << "param,n_vertices,h_bar,kappa_A,kappa_precond,max_tau,theoretical_bound";
  for (auto kind : c.preconditioners) {
    out << ",kappa_" << to_string(kind) << ",pcg_iters_" << to_string(kind);
  }
  out << '\n';
  for (const auto& r : rows) {
    out << r.param << ',' << r.n_vertices << ',' << fmt(r.h_bar) << ',' << fmt(r.kappa_a) << ','
        << fmt(r.kappa_precond) << ',' << fmt(r.max_tau) << ','
        << (r.theoretical_bound ? fmt(*r.theoretical_bound) : std::string());
    for (std::size_t i = 0; i < r.kappa.size(); ++i) out << ',' << fmt(r.kappa[i]) << ',' << r.pcg_iters[i];
    out << '\n';
  }
}

}  // namespace milu
