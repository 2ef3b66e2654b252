#pragma once

#include <functional>
#include <vector>

#include "hestoncal/banded.hpp"
#include "hestoncal/grid.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Time-indexed sequence of fields, fields[k] at tau_k = k * dtau.
struct Trajectory {
  Grid grid;
  std::vector<Field> fields;

  [[nodiscard]] std::size_t steps() const { return fields.empty() ? 0 : fields.size() - 1; }
  const Field& operator[](std::size_t k) const { return fields[k]; }
  Field& operator[](std::size_t k) { return fields[k]; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Value prescribed at a Dirichlet node (i, j) at time tau.
using DirichletValue = std::function<double(std::size_t i, std::size_t j, double tau)>;

inline constexpr double kDefaultTheta = 2.0 / 3.0;

/// Put payoff max(K - e^x, 0), constant in nu.
Field initial_condition(const Grid& grid, const MarketSpec& market);

/// Dirichlet data of the forward problem: K e^{-r tau} at x_min, 0 at x_max.
DirichletValue put_boundary(const MarketSpec& market);

/// One modified Craig-Sneyd step
///
///   Y0  = v + dt (F v + s)
///   Yx  = Y0 + theta dt (Fx Yx - Fx v)
///   Ynu = Yx + theta dt (Fnu Ynu - Fnu v)
///   Y0^ = Y0 + theta dt (F0 Ynu - F0 v)
///   Y0~ = Y0^ + (1/2 - theta) dt (F Ynu - F v)
///   Yx~ = Y0~ + theta dt (Fx Yx~ - Fx v)
///   Ynu~= Yx~ + theta dt (Fnu Ynu~ - Fnu v)
///
/// with the optional source s entering only the explicit predictor. The
/// stage matrices are factored once per line at construction.
class McsStepper {
 public:
  McsStepper(SplitOperators ops, double theta, double dtau);

  [[nodiscard]] const SplitOperators& operators() const { return ops_; }
  [[nodiscard]] double theta() const { return theta_; }
  [[nodiscard]] double dtau() const { return dtau_; }

  /// Advances v from tau to tau + dtau. Dirichlet nodes of the result hold
  /// boundary(i, j, tau + dtau).
  [[nodiscard]] Field step(const Field& v, double tau, const DirichletValue& boundary,
                           const Field* source = nullptr) const;

 private:
  void solve_lines(const std::vector<BandedLu>& lu, const DirectionalOperator& op, Field& rhs) const;
  void impose(Field& f, const DirichletValue& boundary, double tau) const;

  SplitOperators ops_;
  double theta_;
  double dtau_;
  std::vector<BandedLu> lu_x_;
  std::vector<BandedLu> lu_nu_;
};

/// Convenience wrapper around a one-off McsStepper.
Field mcs_step(const Field& v, std::size_t k, const SplitOperators& ops, double theta, double dtau,
               const DirichletValue& boundary);

/// Marches the log-transformed Heston PDE from the payoff to maturity and
/// keeps every time level.
Trajectory solve_forward(const HestonParams& params, const MarketSpec& market, const Grid& grid,
                         double theta = kDefaultTheta);

/// Bilinear interpolation of traj[k] at (ln s0, nu0).
double interpolate_price(const Trajectory& traj, double s0, double nu0, std::size_t k);

/// Bilinear interpolation of a field at (x, nu).
double interpolate(const Field& field, const Grid& grid, double x, double nu);

}  // namespace hestoncal
