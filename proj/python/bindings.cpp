#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srde/analysis.hpp"
#include "srde/bessel.hpp"
#include "srde/cli.hpp"
#include "srde/errors.hpp"
#include "srde/noise.hpp"
#include "srde/solver.hpp"

namespace py = pybind11;
using namespace srde;

namespace {

CorrelationKernel kernel_of(const std::string& kind, double parameter, int dim) {
  if (kind == "white") return CorrelationKernel::white(dim);
  if (kind == "riesz") return CorrelationKernel::riesz(parameter, dim);
  if (kind == "ou") return CorrelationKernel::ornstein_uhlenbeck(parameter, dim);
  if (kind == "constant") return CorrelationKernel::constant(dim);
  throw InvalidArgument("unknown kernel '" + kind + "'");
}

py::dict simulate(const std::string& config, std::optional<std::uint64_t> seed) {
  const auto cfg = cli::parse_config(config);
  const ModelSpec spec = cli::build_spec(cfg);
  RunOptions o;
  o.dt = cfg.dt;
  o.seed = seed ? *seed : cfg.first_seed;
  o.snapshot_every = std::uint64_t(cfg.snapshot_every);
  PathRecord rec;
  {
    py::gil_scoped_release release;
    rec = run_global(spec, o, cfg.m_schedule);
  }
  const std::size_t F = rec.frames.size(), N = rec.grid.size();
  py::array_t<double> t(F), sup(F), l1(F), budget(F), u({F, N});
  auto tv = t.mutable_unchecked<1>();
  auto sv = sup.mutable_unchecked<1>();
  auto lv = l1.mutable_unchecked<1>();
  auto bv = budget.mutable_unchecked<1>();
  auto uv = u.mutable_unchecked<2>();
  for (std::size_t i = 0; i < F; ++i) {
    const Frame& f = rec.frames[i];
    tv(i) = f.t;
    sv(i) = f.sup;
    lv(i) = f.l1;
    bv(i) = f.budget;
    for (std::size_t k = 0; k < N; ++k) uv(i, k) = f.u[k];
  }
  py::dict d;
  d["config_hash"] = cfg.hash;
  d["seed"] = rec.seed;
  d["t"] = t;
  d["sup"] = sup;
  d["l1"] = l1;
  d["budget"] = budget;
  d["u"] = u;
  d["stop_reason"] = to_string(rec.stop.reason);
  d["stop_time"] = rec.stop.time;
  d["exploded"] = rec.stop.exploded;
  d["max_u_minus_v"] = rec.stop.max_u_minus_v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_srde, m) {
  m.doc() = "Bindings to the srde C++ core";
  m.attr("__version__") = cli::kToolVersion;

  static py::exception<Error> base(m, "SrdeError", PyExc_RuntimeError);
  static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def(
      "admissibility",
      [](double beta, double gamma, int d, double kappa) {
        const auto w = admissibility(beta, gamma, d, kappa);
        py::dict r;
        r["p_min"] = w.p_min;
        r["p_max"] = w.p_max;
        r["nonempty"] = w.nonempty;
        return r;
      },
      py::arg("beta"), py::arg("gamma"), py::arg("d"), py::arg("kappa"));

  m.def(
      "holder_prediction",
      [](double beta, double gamma, int d, double kappa, double epsilon) {
        const auto h = holder_prediction(beta, gamma, d, kappa, epsilon);
        py::dict r;
        r["gap"] = h.gap;
        r["space_exponent"] = h.space_exponent;
        r["time_exponent"] = h.time_exponent;
        r["epsilon"] = h.epsilon;
        return r;
      },
      py::arg("beta"), py::arg("gamma"), py::arg("d"), py::arg("kappa"), py::arg("epsilon"));

  m.def(
      "dalang_sup_kappa",
      [](const std::string& kind, double parameter, int dim) {
        return dalang_sup_kappa(kernel_of(kind, parameter, dim));
      },
      py::arg("kind"), py::arg("parameter") = 0.0, py::arg("dim") = 1);

  m.def(
      "bessel",
      [](double order, int dim, double r) { return BesselKernel(order, dim).radial(r); }, py::arg("order"),
      py::arg("dim"), py::arg("r"));

  m.def("truncation", &truncation, py::arg("z"), py::arg("m"));

  m.def("config_hash", [](const std::string& text) { return cli::parse_config(text).hash; }, py::arg("config"));

  m.def("simulate", &simulate, py::arg("config"), py::arg("seed") = py::none(),
        "Runs one patched path from a JSON config string; returns frame arrays.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "srde");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::main_entry(int(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in process; returns (exit code, stdout, stderr).");
}
