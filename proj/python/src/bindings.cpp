#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "milu/adaptive_tree.hpp"
#include "milu/dense.hpp"
#include "milu/error.hpp"
#include "milu/experiment.hpp"
#include "milu/graph_system.hpp"
#include "milu/io.hpp"
#include "milu/krylov.hpp"
#include "milu/lecn.hpp"
#include "milu/ordering.hpp"
#include "milu/preconditioners.hpp"

namespace py = pybind11;
using namespace milu;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  return Array(static_cast<py::ssize_t>(v.size()), v.data());
}

std::span<const double> as_span(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a one-dimensional array");
  return {a.data(), static_cast<std::size_t>(a.size())};
}

Array dense_to_array(const DenseMatrix& m) {
  const auto n = static_cast<py::ssize_t>(m.size());
  Array out({n, n});
  auto r = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i)
    for (py::ssize_t j = 0; j < n; ++j) r(i, j) = m(i, j);
  return out;
}

DenseMatrix array_to_dense(const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw py::value_error("expected a square matrix");
  DenseMatrix m(static_cast<std::size_t>(a.shape(0)));
  auto r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = r(i, j);
  return m;
}

py::dict lecn_dict(const LecnReport& r) {
  py::dict d;
  d["tau"] = to_array(r.tau);
  d["max_tau"] = r.max_tau;
  d["argmax"] = r.argmax;
  d["num_infinite"] = r.num_infinite;
  return d;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ExperimentConfig config_from_py(const py::dict& d) { return config_from_json(py_to_json(d)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Modified incomplete LU preconditioners and localized condition-number estimates";

  static py::exception<Error> milu_error(m, "MiluError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_steal<py::object>(
          PyObject_CallFunction(milu_error.ptr(), "s", e.what()));
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("context") = e.context();
      PyErr_SetObject(milu_error.ptr(), inst.ptr());
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    }
  });

  py::class_<SpdMSystem>(m, "SpdMSystem")
      .def_static(
          "assemble",
          [](Index n, const std::vector<std::tuple<Index, Index, double>>& edges, const Array& slack) {
            std::vector<WeightedEdge> e;
            e.reserve(edges.size());
            for (const auto& [a, b, w] : edges) e.push_back({a, b, w});
            return SpdMSystem::assemble(n, e, as_span(slack));
          },
          py::arg("n"), py::arg("edges"), py::arg("slack"))
      .def_property_readonly("size", &SpdMSystem::size)
      .def_property_readonly("num_edges", &SpdMSystem::num_edges)
      .def("entry", &SpdMSystem::entry)
      .def_property_readonly("slack", [](const SpdMSystem& a) { return to_array(a.slack()); })
      .def_property_readonly("diagonal", [](const SpdMSystem& a) { return to_array(a.diagonal()); })
      .def("neighbors", [](const SpdMSystem& a, Index k) {
        const auto nb = a.neighbors(k);
        return std::vector<Index>(nb.begin(), nb.end());
      })
      .def("edges", [](const SpdMSystem& a) {
        std::vector<std::tuple<Index, Index, double>> out;
        for (const auto& e : a.edges()) out.emplace_back(e.a, e.b, e.weight);
        return out;
      })
      .def("matvec", [](const SpdMSystem& a, const Array& v) { return to_array(a.matvec(as_span(v))); })
      .def("to_dense", [](const SpdMSystem& a) { return dense_to_array(densify(a)); })
      .def("validate", [](const SpdMSystem& a) { return validate(a).failures; })
      .def("to_matrix_market", [](const SpdMSystem& a) {
        std::ostringstream out;
        write_matrix_market(out, a);
        return out.str();
      })
      .def_static("from_matrix_market", [](const std::string& text) {
        std::istringstream in(text);
        return read_matrix_market(in);
      });

  py::class_<VertexOrdering>(m, "VertexOrdering")
      .def_static("from_sequence", &VertexOrdering::from_sequence)
      .def_static("identity", &VertexOrdering::identity)
      .def_property_readonly("size", &VertexOrdering::size)
      .def("rank", &VertexOrdering::rank)
      .def("vertex_at", &VertexOrdering::vertex_at)
      .def("sequence", [](const VertexOrdering& o) {
        return std::vector<Index>(o.sequence().begin(), o.sequence().end());
      });

  m.def("lexicographic_order", [](const std::vector<GridPoint>& c) { return lexicographic_order(c); });
  m.def("sector_order",
        [](const std::vector<GridPoint>& c, const GridPoint& ext) { return sector_order(c, ext); });
  m.def("validate_ordering",
        [](const SpdMSystem& a, const VertexOrdering& o) { return validate_ordering(a, o).failures; });

  py::class_<MiluFactorization>(m, "MiluFactorization")
      .def_property_readonly("e", [](const MiluFactorization& f) { return to_array(f.e()); })
      .def_property_readonly("successor_weight_sum",
                             [](const MiluFactorization& f) { return to_array(f.successor_weight_sum()); })
      .def("apply_inverse",
           [](const MiluFactorization& f, const Array& r) { return to_array(f.apply_inverse(as_span(r))); })
      .def("apply", [](const MiluFactorization& f, const Array& v) { return to_array(f.apply(as_span(v))); })
      .def("to_dense", [](const MiluFactorization& f) { return dense_to_array(f.densify()); });
  m.def("milu_factor", &milu_factor);
  m.def("residual_rowsums",
        [](const SpdMSystem& a, const MiluFactorization& f) { return to_array(residual_rowsums(a, f)); });

  py::class_<Preconditioner>(m, "Preconditioner")
      .def_static(
          "make",
          [](const std::string& kind, const SpdMSystem& a, const VertexOrdering& o) {
            return Preconditioner::make(preconditioner_kind_from_string(kind), a, o);
          },
          py::arg("kind"), py::arg("system"), py::arg("ordering"))
      .def_property_readonly("kind", [](const Preconditioner& p) { return std::string(to_string(p.kind())); })
      .def("apply_inverse",
           [](const Preconditioner& p, const Array& r) { return to_array(p.apply_inverse(as_span(r))); })
      .def("apply", [](const Preconditioner& p, const Array& v) { return to_array(p.apply(as_span(v))); })
      .def("to_dense", [](const Preconditioner& p) { return dense_to_array(p.densify()); });

  m.def("tau_direct", [](const SpdMSystem& a, const MiluFactorization& f) { return lecn_dict(tau_direct(a, f)); });
  m.def("tau_recursive",
        [](const SpdMSystem& a, const VertexOrdering& o) { return lecn_dict(tau_recursive(a, o)); });
  m.def(
      "theoretical_bound",
      [](const std::string& kind, int dim, double l_max, double h) {
        if (kind != "lex" && kind != "sector") throw py::value_error("kind must be 'lex' or 'sector'");
        return theoretical_bound(kind == "lex" ? OrderKind::Lexicographic : OrderKind::Sector, dim, l_max, h);
      },
      py::arg("kind"), py::arg("dim"), py::arg("l_max"), py::arg("h"));

  m.def(
      "pcg",
      [](const SpdMSystem& a, const Array& rhs, const Preconditioner& p, double tol, Index max_iter) {
        PcgOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        const auto r = pcg(a, as_span(rhs), p, opt);
        py::dict d;
        d["solution"] = to_array(r.solution);
        d["iterations"] = r.iterations;
        d["residual_history"] = to_array(r.residual_history);
        d["converged"] = r.converged;
        return d;
      },
      py::arg("system"), py::arg("rhs"), py::arg("preconditioner"), py::arg("tol") = 1e-14,
      py::arg("max_iter") = 0);
  m.def(
      "condition_number",
      [](const SpdMSystem& a, const Preconditioner& p, double tol, Index max_iter) {
        EigenOptions opt;
        opt.tol = tol;
        opt.max_iter = max_iter;
        return json_to_py(to_json(condition_number(a, p, opt)));
      },
      py::arg("system"), py::arg("preconditioner"), py::arg("tol") = 1e-6, py::arg("max_iter") = 0);
  m.def(
      "dense_eigen_oracle",
      [](const Array& a, const Array& mm) {
        const auto ev = dense_eigen_oracle(array_to_dense(a), array_to_dense(mm));
        return to_array(ev);
      },
      py::arg("a"), py::arg("m"));

  py::class_<AdaptiveTree>(m, "AdaptiveTree")
      .def_static(
          "random_tree",
          [](int dim, const GridPoint& ext, int max_depth, double p, std::uint64_t seed, double root_h) {
            return AdaptiveTree::random_tree(dim, ext, max_depth, p, seed, root_h);
          },
          py::arg("dim"), py::arg("extents"), py::arg("max_depth"), py::arg("p"), py::arg("seed"),
          py::arg("root_h") = 1.0)
      .def_property_readonly("num_leaves", &AdaptiveTree::num_leaves)
      .def("uniform_refine", &AdaptiveTree::uniform_refine)
      .def("is_graded", &AdaptiveTree::is_graded)
      .def("to_json", [](const AdaptiveTree& t) { return json_to_py(t.to_json()); })
      .def_static("from_json", [](const py::object& o) { return AdaptiveTree::from_json(py_to_json(o)); });
  m.def("tree_order", &tree_order);
  m.def("fvm_matrix",
        [](const AdaptiveTree& t, const std::string& sigma) { return fvm_matrix(t, scalar_field_from_name(sigma)); });

  m.def(
      "build_system",
      [](const py::dict& config, std::size_t point) {
        const auto c = config_from_py(config);
        if (point >= c.sweep.size()) throw py::index_error("sweep point out of range");
        auto b = build_system(c, c.sweep[point]);
        py::dict d;
        d["system"] = std::move(b.system);
        d["ordering"] = std::move(b.ordering);
        d["coords"] = b.coords;
        d["h_bar"] = b.h_bar;
        d["theoretical_bound"] = b.theoretical_bound ? py::cast(*b.theoretical_bound) : py::none();
        return d;
      },
      py::arg("config"), py::arg("point") = 0);
  m.def(
      "run_experiment",
      [](const py::dict& config) {
        const auto c = config_from_py(config);
        std::vector<ExperimentRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_experiment(c);
        }
        std::ostringstream out;
        write_experiment_csv(out, c, rows);
        return out.str();
      },
      py::arg("config"));
}
