#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "milu/error.hpp"
#include "milu/experiment.hpp"
#include "milu/io.hpp"
#include "milu/krylov.hpp"
#include "milu/lecn.hpp"

namespace {

using milu::ExperimentConfig;
using nlohmann::json;

struct RawFlags {
  std::map<std::string, std::string> values;  // flag name -> raw text
  std::string config_path;
};

void add_common_options(CLI::App* sub, RawFlags& raw) {
  sub->set_help_flag("--help", "print this help");  // frees -h
  static const std::vector<std::pair<std::string, std::string>> flags{
      {"builder", "gibou2d, gibou3d, ifd11, ifd22, hifd22, quadtree_fvm, octree_fvm"},
      {"ordering", "lex, sector or tree"},
      {"precond", "comma list of none, jacobi, ilu0, milu"},
      {"h", "grid sizes, e.g. 1/8,1/16"},
      {"n", "interior nodes per axis for wide-stencil builders"},
      {"depths", "tree depths, e.g. 3..7"},
      {"sigma", "coefficient field: one, example1, example2"},
      {"domain", "box, disk(cx,cy,r) or sphere(cx,cy,cz,r)"},
      {"seed", "random seed"},
      {"max-depth", "depth of the random base tree"},
      {"refine-prob", "refinement probability of the random base tree"},
      {"root-cells", "root cells per axis for tree builders"},
      {"tol", "eigenvalue iteration tolerance"},
      {"pcg-tol", "PCG relative residual tolerance"},
      {"output", "output file (default: $MILU_OUTPUT_DIR/<name> or stdout)"},
      {"jobs", "worker threads for sweeps"},
  };
  for (const auto& [name, help] : flags) sub->add_option("--" + name, raw.values[name], help);
  sub->add_option("--config", raw.config_path, "JSON config file; flags override it");
}

json merged_config(CLI::App* sub, const RawFlags& raw) {
  json cfg = json::object();
  if (!raw.config_path.empty()) {
    std::ifstream in(raw.config_path);
    if (!in) throw milu::ConfigError("cannot open config file '" + raw.config_path + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw milu::ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!cfg.is_object()) throw milu::ConfigError("config file must hold a JSON object");
  }
  for (const auto& [name, value] : raw.values) {
    if (sub->count("--" + name) == 0) continue;
    std::string key = name;
    std::replace(key.begin(), key.end(), '-', '_');
    cfg[key] = value;
  }
  return cfg;
}

std::string destination(const ExperimentConfig& c, const std::string& default_name) {
  if (!c.output.empty()) return c.output;
  if (const char* dir = std::getenv("MILU_OUTPUT_DIR"); dir && *dir) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / default_name).string();
  }
  return {};
}

// Writes through `emit` to the destination file, or stdout when empty.
template <class F>
void write_to(const std::string& dest, F&& emit) {
  if (dest.empty()) {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw milu::Error(milu::ErrorCode::InvalidArgument, "cannot write output", dest);
  emit(out);
}

const milu::SweepPoint& single_point(const ExperimentConfig& c, const char* command) {
  if (c.sweep.size() != 1) {
    throw milu::ConfigError(std::string(command) + " takes exactly one sweep point");
  }
  return c.sweep.front();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int cmd_build(const ExperimentConfig& c) {
  const auto built = milu::build_system(c, single_point(c, "build"));
  const auto dest = destination(c, "system.mtx");
  write_to(dest, [&](std::ostream& o) { milu::write_matrix_market(o, built.system); });
  if (!dest.empty()) {
    json side{{"config", milu::config_to_json(c)},
              {"n_vertices", built.system.size()},
              {"h_bar", built.h_bar},
              {"ordering", milu::ordering_to_json(built.ordering)}};
    if (!built.coords.empty()) side["coords"] = built.coords;
    if (built.tree) side["tree"] = built.tree->to_json();
    std::ofstream(dest + ".json") << side.dump(1) << '\n';
    std::cout << json{{"matrix", dest}, {"sidecar", dest + ".json"}}.dump() << '\n';
  }
  return 0;
}

int cmd_lecn(const ExperimentConfig& c) {
  const auto built = milu::build_system(c, single_point(c, "lecn"));
  const auto f = milu::milu_factor(built.system, built.ordering);
  const auto rep = milu::tau_direct(built.system, f);
  if (rep.num_infinite > 0) {
    std::cerr << "warning: " << rep.num_infinite << " vertices have infinite tau\n";
  }
  const auto dest = destination(c, "lecn.csv");
  write_to(dest, [&](std::ostream& o) { milu::write_tau_csv(o, rep, built.coords); });
  json summary{{"n_vertices", built.system.size()},
               {"max_tau", std::isinf(rep.max_tau) ? json("inf") : json(rep.max_tau)},
               {"argmax", rep.argmax},
               {"num_infinite", rep.num_infinite}};
  if (built.theoretical_bound) summary["theoretical_bound"] = *built.theoretical_bound;
  (dest.empty() ? std::cerr : std::cout) << summary.dump() << '\n';
  return 0;
}

int cmd_cond(const ExperimentConfig& c) {
  std::ostringstream table;
  table << "param,preconditioner,n_vertices,lambda_min,lambda_max,kappa,iters_min,iters_max\n";
  for (const auto& point : c.sweep) {
    const auto built = milu::build_system(c, point);
    const auto& a = built.system;
    const auto milu = milu::Preconditioner::milu(a, built.ordering);
    milu::EigenOptions opts;
    opts.tol = c.tol;
    opts.seed = c.seed;
    opts.inner = &milu;
    std::vector<milu::PreconditionerKind> kinds{milu::PreconditionerKind::Identity};
    for (auto k : c.preconditioners)
      if (k != milu::PreconditionerKind::Identity) kinds.push_back(k);
    for (auto kind : kinds) {
      const auto p = milu::Preconditioner::make(kind, a, built.ordering);
      const auto s = milu::condition_number(a, p, opts);
      table << point.label << ',' << milu::to_string(kind) << ',' << a.size() << ','
            << num(s.lambda_min.value) << ',' << num(s.lambda_max.value) << ',' << num(s.kappa)
            << ',' << s.lambda_min.iterations << ',' << s.lambda_max.iterations << '\n';
    }
  }
  write_to(destination(c, "cond.csv"), [&](std::ostream& o) { o << table.str(); });
  return 0;
}

int cmd_solve(const ExperimentConfig& c) {
  const auto& point = single_point(c, "solve");
  const auto built = milu::build_system(c, point);
  const auto& a = built.system;
  const auto rhs = milu::random_rhs(a.size(), c.seed);
  milu::PcgOptions opts;
  opts.tol = c.pcg_tol;
  json out{{"param", point.label}, {"n_vertices", a.size()}, {"tol", c.pcg_tol}};
  for (auto kind : c.preconditioners) {
    const auto p = milu::Preconditioner::make(kind, a, built.ordering);
    out["reports"][milu::to_string(kind)] = milu::to_json(milu::pcg(a, rhs, p, opts));
  }
  write_to(destination(c, "solve.json"), [&](std::ostream& o) { o << out.dump(1) << '\n'; });
  return 0;
}

int cmd_experiment(const ExperimentConfig& c) {
  const auto rows = milu::run_experiment(c);
  write_to(destination(c, "experiment.csv"),
           [&](std::ostream& o) { milu::write_experiment_csv(o, c, rows); });
  return 0;
}

void print_error(const std::string& code, const std::string& message, const std::string& context) {
  std::cerr << json{{"code", code}, {"message", message}, {"context", context}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MILU preconditioner experiments on SPD M-matrix systems"};
  app.require_subcommand(1);
  std::map<std::string, RawFlags> raws;
  std::map<std::string, int (*)(const ExperimentConfig&)> commands{
      {"build", cmd_build},
      {"lecn", cmd_lecn},
      {"cond", cmd_cond},
      {"solve", cmd_solve},
      {"experiment", cmd_experiment},
  };
  const std::map<std::string, std::string> help{
      {"build", "assemble a system and write it as Matrix Market"},
      {"lecn", "per-vertex tau CSV and max tau"},
      {"cond", "condition number table"},
      {"solve", "PCG solve report"},
      {"experiment", "sweep CSV"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, _] : commands) {
    subs[name] = app.add_subcommand(name, help.at(name));
    add_common_options(subs[name], raws[name]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    ExperimentConfig config;
    try {
      config = milu::config_from_json(merged_config(sub, raws[name]));
    } catch (const milu::ConfigError& e) {
      print_error("ConfigError", e.what(), name);
      return 2;
    }
    try {
      return commands.at(name)(config);
    } catch (const milu::ConfigError& e) {
      print_error("ConfigError", e.what(), name);
      return 2;
    } catch (const milu::Error& e) {
      print_error(std::string(milu::to_string(e.code())), e.what(), e.context());
      return 1;
    } catch (const std::exception& e) {
      print_error("InternalError", e.what(), name);
      return 1;
    }
  }
  return 0;
}
