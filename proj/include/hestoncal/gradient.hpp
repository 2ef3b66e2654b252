#pragma once

#include <cstdint>
#include <optional>

#include "hestoncal/forward_solver.hpp"
#include "hestoncal/grid.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Gradient in calibration order (sigma, rho, kappa, mu).
struct Gradient4 {
  double sigma = 0.0;
  double rho = 0.0;
  double kappa = 0.0;
  double mu = 0.0;

  [[nodiscard]] ParamVector to_vector() const { return {sigma, rho, kappa, mu}; }
  static Gradient4 from_vector(const ParamVector& v) { return {v[0], v[1], v[2], v[3]}; }
  [[nodiscard]] double norm() const { return hestoncal::norm(to_vector()); }
  [[nodiscard]] bool all_finite() const {
    return std::isfinite(sigma) && std::isfinite(rho) && std::isfinite(kappa) && std::isfinite(mu);
  }
};

/// How the parameter derivatives of <e(V,u), phi> are evaluated.
///
/// kLagrangian pairs phi with the parameter derivative of the discrete forward
/// operator applied to V, -sum_k wt_k sum_n w_n phi^k_n (d_u F V^k)_n, over the
/// rows the operator actually owns. It is exact for the discrete problem when
/// phi comes from AdjointScheme::kConservative.
///
/// kPrinted evaluates the integrated-by-parts volume and boundary integrals in
/// their closed form: central differences inside, second-order one-sided
/// differences on the edges, trapezoidal quadrature in x, nu, tau and along each
/// edge of the truncated rectangle.
enum class GradientForm : std::uint8_t { kLagrangian, kPrinted };

/// d<e, phi>/d sigma
double gradient_sigma(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                      const MarketSpec& market, const Grid& grid, GradientForm form = GradientForm::kLagrangian);
/// d<e, phi>/d rho
double gradient_rho(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                    const MarketSpec& market, const Grid& grid, GradientForm form = GradientForm::kLagrangian);
/// d<e, phi>/d kappa
double gradient_kappa(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                      const MarketSpec& market, const Grid& grid, GradientForm form = GradientForm::kLagrangian);
/// d<e, phi>/d mu
double gradient_mu(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                   const MarketSpec& market, const Grid& grid, GradientForm form = GradientForm::kLagrangian);

/// All four d<e, phi>/du in one pass over the trajectories.
Gradient4 constraint_derivatives(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                                 const MarketSpec& market, const Grid& grid,
                                 GradientForm form = GradientForm::kLagrangian);

/// Reduced gradient lambda (u - u_ref) - d<e, phi>/du. The Tikhonov term is
/// dropped when lambda == 0 or no reference is given.
Gradient4 assemble_gradient(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                            const MarketSpec& market, const Grid& grid, double lambda = 0.0,
                            const std::optional<HestonParams>& u_ref = std::nullopt,
                            GradientForm form = GradientForm::kLagrangian);

}  // namespace hestoncal
