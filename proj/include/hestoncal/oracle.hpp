#pragma once

#include <cstdint>
#include <stdexcept>

#include "hestoncal/calibrator.hpp"
#include "hestoncal/gradient.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Raised when the Fourier integrals do not settle within the node budget.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Composite Gauss-Legendre quadrature of the Fourier integrals on
/// [0, upper]. kFixed uses exactly the given nodes (rounded up to whole
/// 32-point panels); kAdaptive doubles the upper bound and halves the panel width until two
/// consecutive prices differ by less than `tolerance`.
struct QuadratureSpec {
  enum class Scheme : std::uint8_t { kFixed, kAdaptive };

  static constexpr std::size_t kPanelNodes = 32;

  double upper = 200.0;
  std::size_t nodes = 512;
  Scheme scheme = Scheme::kAdaptive;
  double tolerance = 1e-12;
  std::size_t max_nodes = std::size_t{1} << 16;

  void validate() const;
};

/// European put under Heston, from the rotation-count-safe ("little trap")
/// characteristic function of ln S_T and put-call parity.
double heston_analytic_put(double s0, double nu0, const MarketSpec& market, const HestonParams& params,
                           const QuadratureSpec& quad = {});
double heston_analytic_call(double s0, double nu0, const MarketSpec& market, const HestonParams& params,
                            const QuadratureSpec& quad = {});

double black_scholes_put(double s0, double vol, const MarketSpec& market);

/// Central differences (J(u + h_i e_i) - J(u - h_i e_i)) / (2 h_i) with
/// h_i = h |u_i|. Throws std::domain_error if a probe leaves the box.
Gradient4 finite_difference_gradient(const CostFunction& j, const ParamVector& u, double h,
                                     const ParamBox& box = {});

/// The same for the reduced PDE cost u -> J(V(u), u) against data v_d.
Gradient4 finite_difference_gradient(const HestonParams& u, const Trajectory& v_d, const MarketSpec& market,
                                     const Grid& grid, const CalibConfig& cfg, double h = 1e-4);

}  // namespace hestoncal
