#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hestoncal/harness.hpp"
#include "hestoncal/oracle.hpp"

namespace py = pybind11;
using namespace hestoncal;

namespace {

py::array_t<double> field_array(const Field& f) {
  py::array_t<double> out({f.x_nodes(), f.nu_nodes()});
  auto v = f.values();
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::tuple params_tuple(const ParamVector& v) { return py::make_tuple(v[0], v[1], v[2], v[3]); }

}  // namespace

PYBIND11_MODULE(_hestoncal, m) {
  m.doc() = "Heston parameter calibration with an adjoint ADI solver";

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<GridMismatch>(m, "GridMismatch", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_RuntimeError);

  py::class_<MarketSpec>(m, "MarketSpec")
      .def(py::init([](double strike, double rate, double dividend, double maturity) {
             MarketSpec s{strike, rate, dividend, maturity};
             s.validate();
             return s;
           }),
           py::arg("strike") = 10.0, py::arg("rate") = 0.1, py::arg("dividend") = 0.05, py::arg("maturity") = 1.0)
      .def_readwrite("strike", &MarketSpec::strike)
      .def_readwrite("rate", &MarketSpec::rate)
      .def_readwrite("dividend", &MarketSpec::dividend)
      .def_readwrite("maturity", &MarketSpec::maturity);

  py::class_<HestonParams>(m, "HestonParams")
      .def(py::init([](double sigma, double rho, double kappa, double mu) {
             return HestonParams{sigma, rho, kappa, mu};
           }),
           py::arg("sigma") = 0.9, py::arg("rho") = 0.1, py::arg("kappa") = 5.0, py::arg("mu") = 0.16)
      .def_readwrite("sigma", &HestonParams::sigma)
      .def_readwrite("rho", &HestonParams::rho)
      .def_readwrite("kappa", &HestonParams::kappa)
      .def_readwrite("mu", &HestonParams::mu)
      .def("feller", &HestonParams::feller)
      .def("as_tuple", [](const HestonParams& p) { return params_tuple(p.to_vector()); })
      .def("__repr__", [](const HestonParams& p) {
        return "HestonParams(sigma=" + std::to_string(p.sigma) + ", rho=" + std::to_string(p.rho) +
               ", kappa=" + std::to_string(p.kappa) + ", mu=" + std::to_string(p.mu) + ")";
      });

  py::class_<Grid>(m, "Grid")
      .def_readonly("x_min", &Grid::x_min)
      .def_readonly("x_max", &Grid::x_max)
      .def_readonly("nu_max", &Grid::nu_max)
      .def_readonly("maturity", &Grid::maturity)
      .def_readonly("n_x", &Grid::n_x)
      .def_readonly("n_nu", &Grid::n_nu)
      .def_readonly("n_tau", &Grid::n_tau)
      .def_readonly("dx", &Grid::dx)
      .def_readonly("dnu", &Grid::dnu)
      .def_readonly("dtau", &Grid::dtau);

  m.def(
      "build_grid",
      [](const MarketSpec& market, std::size_t n_x, std::size_t n_nu, std::size_t n_tau, std::optional<double> x_min,
         std::optional<double> x_max, double nu_max) {
        return build_grid(market, n_x, n_nu, n_tau, TruncationConfig{x_min, x_max, nu_max});
      },
      py::arg("market"), py::arg("n_x") = 80, py::arg("n_nu") = 80, py::arg("n_tau") = 40,
      py::arg("x_min") = py::none(), py::arg("x_max") = py::none(), py::arg("nu_max") = 3.0);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("grid", &Trajectory::grid)
      .def("steps", &Trajectory::steps)
      .def("field", [](const Trajectory& t, std::size_t k) {
        if (k >= t.fields.size()) throw py::index_error("time index out of range");
        return field_array(t.fields[k]);
      });

  m.def("solve_forward", &solve_forward, py::arg("params"), py::arg("market"), py::arg("grid"),
        py::arg("theta") = kDefaultTheta);
  m.def("interpolate_price", &interpolate_price, py::arg("trajectory"), py::arg("s0"), py::arg("nu0"), py::arg("k"));
  m.def("heston_analytic_put",
        [](double s0, double nu0, const MarketSpec& market, const HestonParams& params) {
          return heston_analytic_put(s0, nu0, market, params);
        },
        py::arg("s0"), py::arg("nu0"), py::arg("market"), py::arg("params"));
  m.def("black_scholes_put", &black_scholes_put, py::arg("s0"), py::arg("vol"), py::arg("market"));

  py::class_<CalibConfig>(m, "CalibConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &CalibConfig::lambda)
      .def_readwrite("u_ref", &CalibConfig::u_ref)
      .def_readwrite("gamma", &CalibConfig::gamma)
      .def_readwrite("epsilon", &CalibConfig::epsilon)
      .def_readwrite("max_iters", &CalibConfig::max_iters)
      .def_readwrite("min_step", &CalibConfig::min_step)
      .def_readwrite("theta", &CalibConfig::theta);

  m.def("project", py::overload_cast<const HestonParams&, const CalibConfig&>(&project), py::arg("params"),
        py::arg("config") = CalibConfig{});
  m.def("cost", &cost, py::arg("v"), py::arg("v_d"), py::arg("params"), py::arg("config") = CalibConfig{});

  m.def(
      "adjoint_gradient",
      [](const HestonParams& u, const Trajectory& data, const MarketSpec& market, const Grid& grid,
         const CalibConfig& cfg) {
        const Trajectory v = solve_forward(u, market, grid, cfg.theta);
        const Trajectory phi = solve_adjoint(u, market, grid, residual(v, data), cfg.adjoint, cfg.theta);
        return params_tuple(assemble_gradient(v, phi, u, market, grid, cfg.lambda, cfg.u_ref, cfg.gradient).to_vector());
      },
      py::arg("params"), py::arg("data"), py::arg("market"), py::arg("grid"), py::arg("config") = CalibConfig{});
  m.def(
      "finite_difference_gradient",
      [](const HestonParams& u, const Trajectory& data, const MarketSpec& market, const Grid& grid,
         const CalibConfig& cfg, double h) {
        return params_tuple(finite_difference_gradient(u, data, market, grid, cfg, h).to_vector());
      },
      py::arg("params"), py::arg("data"), py::arg("market"), py::arg("grid"), py::arg("config") = CalibConfig{},
      py::arg("h") = 1e-4);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("u_start", &CalibrationResult::u_start)
      .def_readonly("u_opt", &CalibrationResult::u_opt)
      .def_readonly("cost_history", &CalibrationResult::cost_history)
      .def_readonly("grad_norm_history", &CalibrationResult::grad_norm_history)
      .def_readonly("iterations", &CalibrationResult::iterations)
      .def_readonly("improvement", &CalibrationResult::improvement)
      .def_property_readonly("status", [](const CalibrationResult& r) { return to_string(r.status); });

  m.def("calibrate", &calibrate, py::arg("u0"), py::arg("data"), py::arg("market"), py::arg("grid"),
        py::arg("config") = CalibConfig{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "run_study",
      [](const std::string& config_json, std::optional<std::filesystem::path> out_dir) {
        const ExperimentSpec spec = spec_from_json(config_json);
        StudyReport rep;
        {
          py::gil_scoped_release release;
          rep = run_study(spec);
        }
        if (out_dir) emit_report(rep, *out_dir);
        return report_csv(rep);
      },
      py::arg("config_json") = "{}", py::arg("out_dir") = py::none(),
      "Runs the study described by a JSON config and returns the run table as CSV text.");
  m.attr("REPORT_HEADER") = std::string(kReportHeader);
}
