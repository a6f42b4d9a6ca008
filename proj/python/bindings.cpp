#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gamblet/errors.hpp"
#include "gamblet/pipeline.hpp"

namespace py = pybind11;
using namespace gamblet;

namespace {

py::array_t<double> array(const Vector& v) { return py::array_t<double>(v.size(), v.data()); }

// (data, indices, indptr, shape): the argument order of scipy.sparse.csr_matrix.
py::tuple csr(const CsrMatrix& a) {
  const auto off = a.offsets();
  const auto idx = a.indices();
  const auto val = a.values();
  return py::make_tuple(py::array_t<double>(val.size(), val.data()),
                        py::array_t<Index>(idx.size(), idx.data()),
                        py::array_t<std::int64_t>(off.size(), off.data()),
                        py::make_tuple(a.rows(), a.cols()));
}

py::dict solution_dict(const MultiresSolution& s) {
  py::dict d;
  d["q"] = s.q;
  d["u"] = array(s.u);
  d["coarse"] = array(s.coarse);
  py::list inc, sub;
  for (int k = 1; k <= s.q; ++k) inc.append(array(s.increments[k]));
  for (int k = 2; k <= s.q; ++k) sub.append(array(s.subband[k]));
  d["increments"] = inc;  // [0] = u^(1), [k-1] = u^(k) - u^(k-1)
  d["subband"] = sub;     // [k-2] = w^(k)
  return d;
}

RunConfig config_from_text(const std::string& text) { return parse_config(text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Operator-adapted wavelet (gamblet) solver: C++ core bindings";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("config_hash", [](const std::string& text) { return config_hash(config_from_text(text)); },
        py::arg("config_text"));
  m.def("canonical_config",
        [](const std::string& text) { return canonical_text(config_from_text(text)); },
        py::arg("config_text"));

  m.def(
      "assemble",
      [](const std::string& text) {
        const Problem p = build_problem(config_from_text(text));
        py::dict d;
        d["n"] = p.grid.n;
        d["h"] = p.grid.h;
        d["mass"] = csr(p.mass);
        d["stiffness"] = csr(p.stiffness);
        d["coefficient"] = array(p.coefficient.values);
        d["contrast"] = p.coefficient.contrast();
        d["load"] = array(p.load.nodal);
        d["rhs"] = array(p.load.rhs);
        return d;
      },
      py::arg("config_text") = "",
      "Grid data, Q1 matrices (as CSR tuples) and load for a configuration.");

  m.def(
      "solve",
      [](const std::string& text) {
        const RunConfig cfg = config_from_text(text);
        const Problem p = build_problem(cfg);
        Transform t;
        {
          py::gil_scoped_release release;
          t = run_transform(p, cfg, cfg.threads);
        }
        py::dict d = solution_dict(t.solution());
        d["pipeline"] = to_string(cfg.pipeline);
        d["config_hash"] = config_hash(cfg);
        if (t.fast) {
          d["total_flops"] = t.fast->report.total_flops();
          py::list rho;
          for (int k = 1; k <= cfg.q; ++k) rho.append(t.fast->schedule.rho[k]);
          d["rho"] = rho;
        }
        return d;
      },
      py::arg("config_text") = "",
      "Runs the configured pipeline and returns u with its multiresolution parts.");

  m.def(
      "basis",
      [](const std::string& text, int k, Index i, bool chi) {
        const RunConfig cfg = config_from_text(text);
        if (k < 1 || k > cfg.q) throw py::index_error("level out of range");
        const Problem p = build_problem(cfg, true);
        const Transform t = run_transform(p, cfg, cfg.threads);
        const Index size = chi ? (k >= 2 ? p.tree.subband_size(k) : 0) : p.tree.size(k);
        if (i < 0 || i >= size) throw py::index_error("basis index out of range");
        return array(chi ? t.chi_row(k, i) : t.psi_row(k, i));
      },
      py::arg("config_text"), py::arg("k"), py::arg("i"), py::arg("chi") = false,
      "Fine-grid nodal values of psi_i^(k) (or chi_i^(k)).");

  m.def(
      "schedule",
      [](int q, double epsilon, double c_rho) {
        const LocalizationSchedule s = make_schedule(q, epsilon, c_rho);
        return std::vector<int>(s.rho.begin() + 1, s.rho.end());
      },
      py::arg("q"), py::arg("epsilon"), py::arg("c_rho") = kDefaultCRho);

  m.def(
      "run",
      [](const std::string& command, const std::filesystem::path& config,
         std::optional<std::filesystem::path> out, std::optional<int> threads) {
        std::ostringstream err;
        CommandArgs args{command, config, std::move(out), threads};
        int rc;
        {
          py::gil_scoped_release release;
          rc = run_command(args, err);
        }
        return py::make_tuple(rc, err.str());
      },
      py::arg("command"), py::arg("config"), py::arg("out") = py::none(),
      py::arg("threads") = py::none(),
      "Same as the command-line tool; returns (exit_code, stderr_text).");

  m.attr("DEFAULT_C_RHO") = kDefaultCRho;
}
