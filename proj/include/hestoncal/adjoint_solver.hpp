#pragma once

#include <cstdint>
#include <vector>

#include "hestoncal/forward_solver.hpp"
#include "hestoncal/grid.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Discretization of the adjoint operator.
///
/// kConservative discretizes the divergence form of the adjoint so that it is
/// the exact dual of the forward stencils under the trapezoidal inner product:
/// A*_{mn} = F_{nm} w_n / w_m, per split direction. Donor-cell upwinding of the
/// nu-flux and the nu = 0 closure then match the forward scheme, which keeps the
/// gradient consistent with finite differences of the discrete cost.
///
/// kExpanded discretizes the non-divergence adjoint
///
///   phi_s = nu/2 phi_xx + sigma^2 nu/2 phi_nunu + sigma rho nu phi_xnu
///           + (q - r + nu/2 + sigma rho) phi_x + (sigma^2 - kappa (mu - nu)) phi_nu
///           + (kappa - r) phi + (V - V_d)
///
/// with upwinding on the sign of its own nu-drift, phi = 0 on nu = 0 and the
/// nu_max row phi_s = nu/2 phi_xx - (r - q - nu/2) phi_x.
enum class AdjointScheme : std::uint8_t { kConservative, kExpanded };

/// (V - V_d) at every time level.
struct ResidualTrajectory {
  Grid grid;
  std::vector<Field> fields;
};

/// Throws GridMismatch if v and v_d were computed on different meshes.
ResidualTrajectory residual(const Trajectory& v, const Trajectory& v_d);

SplitOperators assemble_adjoint_operators(const HestonParams& params, const MarketSpec& market, const Grid& grid,
                                          AdjointScheme scheme = AdjointScheme::kConservative);

/// Marches the adjoint from phi(T) = 0 back to tau = 0 in s = T - tau with the
/// same mCS stepper as the forward problem. The residual enters the explicit
/// predictor averaged over the two bracketing time levels. phi is zero on the
/// x-boundaries (and on nu = 0 for kExpanded) at every level.
Trajectory solve_adjoint(const HestonParams& params, const MarketSpec& market, const Grid& grid,
                         const ResidualTrajectory& res, AdjointScheme scheme = AdjointScheme::kConservative,
                         double theta = kDefaultTheta);

}  // namespace hestoncal
