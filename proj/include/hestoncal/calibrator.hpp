#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hestoncal/adjoint_solver.hpp"
#include "hestoncal/forward_solver.hpp"
#include "hestoncal/gradient.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Per-parameter bounds in calibration order.
struct ParamBox {
  ParamVector lower{0.01, -0.999, 0.01, 0.001};
  ParamVector upper{2.0, 0.999, 20.0, 1.0};

  void validate() const;
  [[nodiscard]] bool contains(const ParamVector& u) const;
};

enum class LineSearch : std::uint8_t { kProjected, kPlain };

enum class CalibStatus : std::uint8_t { kConverged, kMaxIters, kLineSearchFailure };

std::string to_string(CalibStatus status);

struct CalibConfig {
  double lambda = 0.0;
  std::optional<HestonParams> u_ref;
  double gamma = 1e-4;
  double epsilon = 1e-4;
  std::size_t max_iters = 100;
  double min_step = std::ldexp(1.0, -30);
  ParamBox box;
  double theta = 2.0 / 3.0;
  LineSearch line_search = LineSearch::kProjected;
  AdjointScheme adjoint = AdjointScheme::kConservative;
  GradientForm gradient = GradientForm::kLagrangian;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

/// One accepted descent step, enough to recheck the line-search inequality.
struct StepRecord {
  std::size_t iteration = 0;
  ParamVector u{};
  ParamVector u_next{};
  ParamVector grad{};
  double cost = 0.0;
  double cost_next = 0.0;
  double step = 0.0;
  std::size_t trials = 0;
};

struct CalibrationResult {
  HestonParams u_start;  // u0 after projection
  HestonParams u_opt;
  std::vector<double> cost_history;       // J at every iterate, starting with J(u_start)
  std::vector<double> grad_norm_history;  // gradient norm at the same iterates
  std::vector<Gradient4> gradient_history;
  std::vector<StepRecord> steps;
  std::size_t iterations = 0;  // accepted steps
  CalibStatus status = CalibStatus::kMaxIters;
  bool start_projected = false;  // u0 was moved by the initial projection
  double improvement = 0.0;

  [[nodiscard]] double initial_cost() const { return cost_history.front(); }
  [[nodiscard]] double final_cost() const { return cost_history.back(); }
};

/// 1/2 int_0^T ||V - V_d||^2 dtau + lambda/2 ||u - u_ref||^2, trapezoidal in
/// every dimension.
double cost(const Trajectory& v, const Trajectory& v_d, const HestonParams& u, const CalibConfig& cfg);

/// Clamp to the box, then shrink sigma onto the Feller boundary if needed.
HestonParams project(const HestonParams& u, const CalibConfig& cfg);
ParamVector project(const ParamVector& u, const CalibConfig& cfg);

using CostFunction = std::function<double(const ParamVector&)>;

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  ParamVector u_next{};
  double cost_next = 0.0;
  std::size_t trials = 0;
};

/// Largest step in {1, 1/2, 1/4, ...} with f(u + s d) - f(u) <= gamma s <grad, d>.
/// f_u is f(u). Throws std::invalid_argument unless d is a descent direction.
LineSearchResult armijo_search(const CostFunction& f, const ParamVector& u, double f_u, const ParamVector& d,
                               const ParamVector& grad, double gamma, double min_step);

/// Largest step in {1, 1/2, ...} with
/// f(P(u - s g)) - f(u) <= -(gamma / s) ||P(u - s g) - u||^2.
LineSearchResult projected_armijo_search(const CostFunction& f, const ParamVector& u, double f_u,
                                         const ParamVector& grad, double gamma, const CalibConfig& cfg);

/// The projected Armijo inequality for a logged step.
bool projected_armijo_holds(double cost, double cost_next, double step, const ParamVector& u,
                            const ParamVector& u_next, double gamma);

/// Gradient descent with (projected) Armijo steps: forward solve, adjoint
/// solve, gradient, line search, until the gradient norm drops to epsilon.
CalibrationResult calibrate(const HestonParams& u0, const Trajectory& v_d, const MarketSpec& market,
                            const Grid& grid, const CalibConfig& cfg);

/// (J0 - J_opt) / J0. Throws std::invalid_argument unless j0 > 0.
double improvement(double j0, double j_opt);

}  // namespace hestoncal
