#include "hestoncal/calibrator.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace hestoncal {

void ParamBox::validate() const {
  for (std::size_t c = 0; c < 4; ++c) {
    if (!(lower[c] < upper[c])) {
      throw std::invalid_argument(std::string("box for ") + kParamNames[c] + " needs lower < upper");
    }
  }
  if (lower[kRho] < -1.0 || upper[kRho] > 1.0) throw std::invalid_argument("rho bounds must lie in [-1, 1]");
  if (lower[kSigma] <= 0.0 || lower[kKappa] <= 0.0 || lower[kMu] <= 0.0) {
    throw std::invalid_argument("sigma, kappa and mu bounds must be positive");
  }
  if (2.0 * upper[kKappa] * upper[kMu] < lower[kSigma] * lower[kSigma]) {
    throw std::invalid_argument("box contains no point satisfying the Feller condition");
  }
}

bool ParamBox::contains(const ParamVector& u) const {
  for (std::size_t c = 0; c < 4; ++c) {
    if (!(u[c] >= lower[c] && u[c] <= upper[c])) return false;
  }
  return true;
}

std::string to_string(CalibStatus status) {
  switch (status) {
    case CalibStatus::kConverged:
      return "converged";
    case CalibStatus::kMaxIters:
      return "max_iters";
    case CalibStatus::kLineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

void CalibConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw std::invalid_argument("min_step must lie in (0, 1]");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  box.validate();
}

double cost(const Trajectory& v, const Trajectory& v_d, const HestonParams& u, const CalibConfig& cfg) {
  require_same_grid(v.grid, v_d.grid, "cost");
  if (v.fields.size() != v_d.fields.size()) throw GridMismatch("cost: trajectories differ in length");
  const Field w = trapezoid_weights(v.grid);
  const std::vector<double> wt = time_weights(v.grid);
  double total = 0.0;
  for (std::size_t k = 0; k < v.fields.size(); ++k) {
    double slab = 0.0;
    const Field& a = v.fields[k];
    const Field& b = v_d.fields[k];
    for (std::size_t n = 0; n < a.size(); ++n) {
      const double e = a[n] - b[n];
      slab += w[n] * e * e;
    }
    total += wt[k] * slab;
  }
  double j = 0.5 * total;
  if (cfg.lambda > 0.0 && cfg.u_ref) {
    const ParamVector x = u.to_vector();
    const ParamVector r = cfg.u_ref->to_vector();
    ParamVector d{};
    for (std::size_t c = 0; c < 4; ++c) d[c] = x[c] - r[c];
    j += 0.5 * cfg.lambda * dot(d, d);
  }
  return j;
}

ParamVector project(const ParamVector& u, const CalibConfig& cfg) {
  const ParamBox& box = cfg.box;
  ParamVector p{};
  for (std::size_t c = 0; c < 4; ++c) p[c] = std::clamp(u[c], box.lower[c], box.upper[c]);

  // Near the lower corner even sigma_min breaks Feller; lift mu, then kappa,
  // just far enough for 2 kappa mu = sigma_min^2.
  const double floor = box.lower[kSigma] * box.lower[kSigma];
  if (2.0 * p[kKappa] * p[kMu] < floor) {
    p[kMu] = std::min(box.upper[kMu], floor / (2.0 * p[kKappa]));
    if (2.0 * p[kKappa] * p[kMu] < floor) p[kKappa] = std::min(box.upper[kKappa], floor / (2.0 * p[kMu]));
    while (2.0 * p[kKappa] * p[kMu] < floor && p[kMu] < box.upper[kMu]) p[kMu] = std::nextafter(p[kMu], 2.0 * p[kMu]);
  }

  const double cap = 2.0 * p[kKappa] * p[kMu];
  if (cap < p[kSigma] * p[kSigma]) {
    p[kSigma] = std::max(std::sqrt(cap), box.lower[kSigma]);
    // the rounded square root may overshoot by an ulp
    while (p[kSigma] * p[kSigma] > cap && p[kSigma] > box.lower[kSigma]) p[kSigma] = std::nextafter(p[kSigma], 0.0);
  }
  return p;
}

HestonParams project(const HestonParams& u, const CalibConfig& cfg) {
  return HestonParams::from_vector(project(u.to_vector(), cfg));
}

LineSearchResult armijo_search(const CostFunction& f, const ParamVector& u, double f_u, const ParamVector& d,
                               const ParamVector& grad, double gamma, double min_step) {
  const double slope = dot(grad, d);
  if (!(slope < 0.0)) throw std::invalid_argument("armijo_search: d is not a descent direction");
  LineSearchResult out;
  for (double s = 1.0; s >= min_step; s *= 0.5) {
    ParamVector trial{};
    for (std::size_t c = 0; c < 4; ++c) trial[c] = u[c] + s * d[c];
    const double ft = f(trial);
    ++out.trials;
    if (ft - f_u <= gamma * s * slope) {
      out.accepted = true;
      out.step = s;
      out.u_next = trial;
      out.cost_next = ft;
      return out;
    }
  }
  return out;
}

bool projected_armijo_holds(double cost, double cost_next, double step, const ParamVector& u,
                            const ParamVector& u_next, double gamma) {
  ParamVector d{};
  for (std::size_t c = 0; c < 4; ++c) d[c] = u_next[c] - u[c];
  return cost_next - cost <= -(gamma / step) * dot(d, d);
}

LineSearchResult projected_armijo_search(const CostFunction& f, const ParamVector& u, double f_u,
                                         const ParamVector& grad, double gamma, const CalibConfig& cfg) {
  LineSearchResult out;
  for (double s = 1.0; s >= cfg.min_step; s *= 0.5) {
    ParamVector raw{};
    for (std::size_t c = 0; c < 4; ++c) raw[c] = u[c] - s * grad[c];
    const ParamVector trial = project(raw, cfg);
    const double ft = trial == u ? f_u : f(trial);
    ++out.trials;
    if (projected_armijo_holds(f_u, ft, s, u, trial, gamma)) {
      out.accepted = true;
      out.step = s;
      out.u_next = trial;
      out.cost_next = ft;
      return out;
    }
  }
  return out;
}

double improvement(double j0, double j_opt) {
  if (!(j0 > 0.0)) throw std::invalid_argument("improvement needs J0 > 0");
  return (j0 - j_opt) / j0;
}

CalibrationResult calibrate(const HestonParams& u0, const Trajectory& v_d, const MarketSpec& market,
                            const Grid& grid, const CalibConfig& cfg) {
  cfg.validate();
  require_same_grid(grid, v_d.grid, "calibrate");

  CalibrationResult res;
  res.u_start = project(u0, cfg);
  res.start_projected = !(res.u_start == u0);

  ParamVector u = res.u_start.to_vector();
  Trajectory v;
  std::size_t iter = 0;

  auto context = [&](const std::exception& e) {
    return SolverError("calibration iteration " + std::to_string(iter) + ": " + e.what());
  };

  // The trajectory of the most recent evaluation; the accepted trial is
  // always the last one evaluated.
  Trajectory last;
  const CostFunction reduced = [&](const ParamVector& x) {
    if (!cfg.box.contains(x) || !HestonParams::from_vector(x).feller()) {
      return std::numeric_limits<double>::infinity();
    }
    const HestonParams p = HestonParams::from_vector(x);
    last = solve_forward(p, market, grid, cfg.theta);
    return cost(last, v_d, p, cfg);
  };

  double j = 0.0;
  try {
    v = solve_forward(res.u_start, market, grid, cfg.theta);
    j = cost(v, v_d, res.u_start, cfg);
  } catch (const SolverError& e) {
    throw context(e);
  }

  for (;; ++iter) {
    const HestonParams p = HestonParams::from_vector(u);
    Gradient4 g;
    try {
      const Trajectory phi = solve_adjoint(p, market, grid, residual(v, v_d), cfg.adjoint, cfg.theta);
      g = assemble_gradient(v, phi, p, market, grid, cfg.lambda, cfg.u_ref, cfg.gradient);
    } catch (const SolverError& e) {
      throw context(e);
    }
    const ParamVector gv = g.to_vector();
    res.cost_history.push_back(j);
    res.grad_norm_history.push_back(g.norm());
    res.gradient_history.push_back(g);

    if (g.norm() <= cfg.epsilon) {
      res.status = CalibStatus::kConverged;
      break;
    }
    if (cfg.line_search == LineSearch::kProjected) {
      ParamVector full{};
      for (std::size_t c = 0; c < 4; ++c) full[c] = u[c] - gv[c];
      if (project(full, cfg) == u) {  // stationary for the constrained problem
        res.status = CalibStatus::kConverged;
        break;
      }
    }
    if (iter >= cfg.max_iters) {
      res.status = CalibStatus::kMaxIters;
      break;
    }

    LineSearchResult ls;
    try {
      if (cfg.line_search == LineSearch::kProjected) {
        ls = projected_armijo_search(reduced, u, j, gv, cfg.gamma, cfg);
      } else {
        ParamVector d{};
        for (std::size_t c = 0; c < 4; ++c) d[c] = -gv[c];
        ls = armijo_search(reduced, u, j, d, gv, cfg.gamma, cfg.min_step);
      }
    } catch (const SolverError& e) {
      throw context(e);
    }
    // A step that does not lower the cost is a stall, not progress.
    if (!ls.accepted || !(ls.cost_next < j)) {
      res.status = CalibStatus::kLineSearchFailure;
      break;
    }
    res.steps.push_back({iter, u, ls.u_next, gv, j, ls.cost_next, ls.step, ls.trials});
    u = ls.u_next;
    j = ls.cost_next;
    v = std::move(last);
  }

  res.u_opt = HestonParams::from_vector(u);
  res.iterations = res.steps.size();
  res.improvement = res.initial_cost() > 0.0 ? improvement(res.initial_cost(), res.final_cost()) : 0.0;
  return res;
}

}  // namespace hestoncal
