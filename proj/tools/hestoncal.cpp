#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hestoncal/harness.hpp"
#include "hestoncal/oracle.hpp"

using namespace hestoncal;

namespace {

constexpr int kExitRunFailure = 1;
constexpr int kExitConfig = 2;

// Flags shared by every subcommand. Values given on the command line win over
// the config file.
struct Flags {
  std::string config;
  std::vector<std::function<void(ExperimentSpec&)>> setters;

  template <class T, class Apply>
  void add(CLI::App& app, const std::string& name, const std::string& help, Apply apply) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app.add_option(name, *value, help);
    setters.push_back([opt, value, apply](ExperimentSpec& s) {
      if (opt->count() > 0) apply(s, *value);
    });
  }

  void add_flag(CLI::App& app, const std::string& name, const std::string& help,
                std::function<void(ExperimentSpec&)> apply) {
    CLI::Option* opt = app.add_flag(name, help);
    setters.push_back([opt, apply](ExperimentSpec& s) {
      if (opt->count() > 0) apply(s);
    });
  }

  ExperimentSpec resolve(StudyKind kind, bool kind_from_command) const {
    ExperimentSpec s;
    s.kind = kind;
    if (!config.empty()) s = load_spec(config, s);
    if (kind_from_command) s.kind = kind;
    for (const auto& set : setters) set(s);
    s.validate();
    return s;
  }
};

void register_flags(CLI::App& app, Flags& f) {
  app.add_option("-c,--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  f.add<std::string>(app, "-o,--out", "output directory", [](ExperimentSpec& s, const std::string& v) { s.output_dir = v; });
  f.add<std::uint64_t>(app, "--seed", "RNG seed", [](ExperimentSpec& s, std::uint64_t v) { s.seed = v; });
  f.add<std::size_t>(app, "--samples", "initial guesses per deviation level",
                     [](ExperimentSpec& s, std::size_t v) { s.samples = v; });
  f.add<std::vector<double>>(app, "--deltas", "maximum relative deviations",
                             [](ExperimentSpec& s, const std::vector<double>& v) { s.deltas = v; });
  f.add<std::vector<double>>(app, "--maturities", "maturities of the maturity study",
                             [](ExperimentSpec& s, const std::vector<double>& v) { s.maturities = v; });
  f.add<std::size_t>(app, "--nx", "cells in x", [](ExperimentSpec& s, std::size_t v) { s.mesh.n_x = v; });
  f.add<std::size_t>(app, "--nnu", "cells in nu", [](ExperimentSpec& s, std::size_t v) { s.mesh.n_nu = v; });
  f.add<std::size_t>(app, "--ntau", "time steps", [](ExperimentSpec& s, std::size_t v) { s.mesh.n_tau = v; });
  f.add<double>(app, "--x-min", "lower log-price bound", [](ExperimentSpec& s, double v) { s.truncation.x_min = v; });
  f.add<double>(app, "--x-max", "upper log-price bound", [](ExperimentSpec& s, double v) { s.truncation.x_max = v; });
  f.add<double>(app, "--nu-max", "upper variance bound", [](ExperimentSpec& s, double v) { s.truncation.nu_max = v; });
  f.add<double>(app, "--strike", "strike", [](ExperimentSpec& s, double v) { s.market.strike = v; });
  f.add<double>(app, "--rate", "risk-free rate", [](ExperimentSpec& s, double v) { s.market.rate = v; });
  f.add<double>(app, "--dividend", "dividend yield", [](ExperimentSpec& s, double v) { s.market.dividend = v; });
  f.add<double>(app, "--maturity", "maturity in years", [](ExperimentSpec& s, double v) { s.market.maturity = v; });
  f.add<double>(app, "--sigma0", "initial vol-of-variance", [](ExperimentSpec& s, double v) { s.initial.sigma = v; });
  f.add<double>(app, "--rho0", "initial correlation", [](ExperimentSpec& s, double v) { s.initial.rho = v; });
  f.add<double>(app, "--kappa0", "initial mean reversion", [](ExperimentSpec& s, double v) { s.initial.kappa = v; });
  f.add<double>(app, "--mu0", "initial long-run variance", [](ExperimentSpec& s, double v) { s.initial.mu = v; });
  f.add<double>(app, "--ref-sigma", "data vol-of-variance", [](ExperimentSpec& s, double v) { s.reference.sigma = v; });
  f.add<double>(app, "--ref-rho", "data correlation", [](ExperimentSpec& s, double v) { s.reference.rho = v; });
  f.add<double>(app, "--ref-kappa", "data mean reversion", [](ExperimentSpec& s, double v) { s.reference.kappa = v; });
  f.add<double>(app, "--ref-mu", "data long-run variance", [](ExperimentSpec& s, double v) { s.reference.mu = v; });
  f.add<double>(app, "--epsilon", "gradient-norm tolerance", [](ExperimentSpec& s, double v) { s.calib.epsilon = v; });
  f.add<std::size_t>(app, "--max-iters", "iteration cap", [](ExperimentSpec& s, std::size_t v) { s.calib.max_iters = v; });
  f.add<double>(app, "--gamma", "Armijo constant", [](ExperimentSpec& s, double v) { s.calib.gamma = v; });
  f.add<double>(app, "--lambda", "Tikhonov weight (reference = data parameters)", [](ExperimentSpec& s, double v) {
    s.calib.lambda = v;
    if (!s.calib.u_ref) s.calib.u_ref = s.reference;
  });
  f.add<double>(app, "--theta", "ADI parameter", [](ExperimentSpec& s, double v) { s.calib.theta = v; });
  f.add<std::string>(app, "--line-search", "projected | plain", [](ExperimentSpec& s, const std::string& v) {
    if (v == "projected") {
      s.calib.line_search = LineSearch::kProjected;
    } else if (v == "plain") {
      s.calib.line_search = LineSearch::kPlain;
    } else {
      throw ConfigError("unknown line search '" + v + "'");
    }
  });
  f.add<std::string>(app, "--adjoint", "conservative | expanded", [](ExperimentSpec& s, const std::string& v) {
    if (v == "conservative") {
      s.calib.adjoint = AdjointScheme::kConservative;
    } else if (v == "expanded") {
      s.calib.adjoint = AdjointScheme::kExpanded;
    } else {
      throw ConfigError("unknown adjoint scheme '" + v + "'");
    }
  });
  f.add<std::string>(app, "--gradient", "lagrangian | printed", [](ExperimentSpec& s, const std::string& v) {
    if (v == "lagrangian") {
      s.calib.gradient = GradientForm::kLagrangian;
    } else if (v == "printed") {
      s.calib.gradient = GradientForm::kPrinted;
    } else {
      throw ConfigError("unknown gradient form '" + v + "'");
    }
  });
  f.add<std::size_t>(app, "-j,--workers", "worker threads (0: all cores)",
                     [](ExperimentSpec& s, std::size_t v) { s.workers = v; });
  f.add_flag(app, "--timing", "record wall time per run", [](ExperimentSpec& s) { s.record_timing = true; });
  f.add<double>(app, "--s0", "spot for price", [](ExperimentSpec& s, double v) { s.spot = v; });
  f.add<double>(app, "--nu0", "initial variance for price", [](ExperimentSpec& s, double v) { s.nu0 = v; });
}

Grid spec_grid(const ExperimentSpec& s) {
  return build_grid(s.market, s.mesh.n_x, s.mesh.n_nu, s.mesh.n_tau, s.truncation);
}

int cmd_price(const ExperimentSpec& s) {
  const Grid grid = spec_grid(s);
  const Trajectory traj = solve_forward(s.reference, s.market, grid, s.calib.theta);
  const double pde = interpolate_price(traj, s.spot, s.nu0, grid.n_tau);
  std::printf("pde_price      %.12g\n", pde);
  if (s.reference.feller()) {
    const double ref = heston_analytic_put(s.spot, s.nu0, s.market, s.reference);
    std::printf("analytic_price %.12g\nrel_error      %.3e\n", ref, (pde - ref) / ref);
  } else {
    std::printf("analytic_price skipped (Feller condition violated)\n");
  }
  return 0;
}

int cmd_gradcheck(const ExperimentSpec& s) {
  const Grid grid = spec_grid(s);
  const Trajectory data = generate_data(s.reference, s.market, grid, s.calib.theta);
  const HestonParams u = project(s.initial, s.calib);
  const Trajectory v = solve_forward(u, s.market, grid, s.calib.theta);
  const Trajectory phi = solve_adjoint(u, s.market, grid, residual(v, data), s.calib.adjoint, s.calib.theta);
  const ParamVector adj =
      assemble_gradient(v, phi, u, s.market, grid, s.calib.lambda, s.calib.u_ref, s.calib.gradient).to_vector();
  const ParamVector fd = finite_difference_gradient(u, data, s.market, grid, s.calib).to_vector();
  std::printf("J = %.12g\n%-6s %20s %20s %12s\n", cost(v, data, u, s.calib), "param", "adjoint", "finite_diff",
              "rel_error");
  for (std::size_t c = 0; c < 4; ++c) {
    std::printf("%-6s %20.12e %20.12e %12.3e\n", kParamNames[c], adj[c], fd[c], (adj[c] - fd[c]) / std::abs(fd[c]));
  }
  return 0;
}

int cmd_study(const ExperimentSpec& s) {
  const StudyReport rep = run_study(s);
  for (const auto& path : emit_report(rep, s.output_dir)) std::cout << "wrote " << path.string() << "\n";
  for (const auto& r : rep.runs) {
    if (r.failed()) std::cerr << "run " << r.run_id << " failed: " << r.error << "\n";
  }
  if (rep.kind == StudyKind::kRandom && rep.reprojected_draws > 0) {
    std::cerr << rep.reprojected_draws << " initial draws were projected onto the feasible set\n";
  }
  if (rep.kind == StudyKind::kSingle && !rep.runs.empty()) {
    const auto& r = rep.runs.front();
    std::printf("status %s  iters %zu  J0 %.6e  Jopt %.6e  improvement %.4f\n", r.status.c_str(), r.iterations,
                r.j0, r.j_opt, r.improvement);
    std::printf("u_opt  sigma %.6f  rho %.6f  kappa %.6f  mu %.6f\n", r.u_opt.sigma, r.u_opt.rho, r.u_opt.kappa,
                r.u_opt.mu);
  }
  return rep.any_failed() ? kExitRunFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heston parameter calibration by adjoint gradient descent"};
  app.require_subcommand(1);

  Flags price_flags, calib_flags, grad_flags, mesh_flags, maturity_flags, random_flags;
  auto* price = app.add_subcommand("price", "PDE put price against the characteristic-function price");
  register_flags(*price, price_flags);
  auto* calibrate_cmd = app.add_subcommand("calibrate", "one calibration from the initial guess");
  register_flags(*calibrate_cmd, calib_flags);
  auto* gradcheck = app.add_subcommand("gradcheck", "adjoint gradient against central finite differences");
  register_flags(*gradcheck, grad_flags);
  auto* study = app.add_subcommand("study", "run an experiment study");
  study->require_subcommand(1);
  auto* mesh = study->add_subcommand("mesh", "calibrate on a list of meshes");
  register_flags(*mesh, mesh_flags);
  auto* maturity = study->add_subcommand("maturity", "calibrate for a list of maturities");
  register_flags(*maturity, maturity_flags);
  auto* random = study->add_subcommand("random", "calibrate from random initial guesses");
  register_flags(*random, random_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*price) return cmd_price(price_flags.resolve(StudyKind::kSingle, false));
    if (*gradcheck) return cmd_gradcheck(grad_flags.resolve(StudyKind::kSingle, false));
    if (*calibrate_cmd) return cmd_study(calib_flags.resolve(StudyKind::kSingle, true));
    if (*mesh) return cmd_study(mesh_flags.resolve(StudyKind::kMesh, true));
    if (*maturity) return cmd_study(maturity_flags.resolve(StudyKind::kMaturity, true));
    if (*random) return cmd_study(random_flags.resolve(StudyKind::kRandom, true));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfig;
}
