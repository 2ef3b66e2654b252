#include "hestoncal/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hestoncal {

namespace {

std::vector<BandedLu> factor_stage(const DirectionalOperator& op, const std::vector<std::uint8_t>& dirichlet,
                                   double scale) {
  constexpr std::size_t c = DirectionalOperator::kHalfBand;
  std::vector<BandedLu> out;
  out.reserve(op.line_count());
  const std::size_t len = op.line_length();
  const std::size_t s = op.stride();
  for (std::size_t line = 0; line < op.line_count(); ++line) {
    const std::size_t start = op.line_start(line);
    std::vector<BandedLu::Row> rows(len, BandedLu::Row{});
    for (std::size_t p = 0; p < len; ++p) {
      const std::size_t n = start + p * s;
      if (dirichlet[n]) {
        rows[p][c] = 1.0;
        continue;
      }
      const auto& r = op.row(n);
      for (std::size_t o = 0; o < r.size(); ++o) rows[p][o] = -scale * r[o];
      rows[p][c] += 1.0;
    }
    out.emplace_back(std::move(rows));
  }
  return out;
}

void axpy(Field& y, double a, const Field& x) {
  for (std::size_t n = 0; n < y.size(); ++n) y[n] += a * x[n];
}

}  // namespace

Field initial_condition(const Grid& grid, const MarketSpec& market) {
  Field f(grid);
  for (std::size_t i = 0; i <= grid.n_x; ++i) {
    const double payoff = std::max(market.strike - std::exp(grid.x(i)), 0.0);
    for (std::size_t j = 0; j <= grid.n_nu; ++j) f(i, j) = payoff;
  }
  return f;
}

DirichletValue put_boundary(const MarketSpec& market) {
  return [strike = market.strike, rate = market.rate](std::size_t i, std::size_t, double tau) {
    return i == 0 ? strike * std::exp(-rate * tau) : 0.0;
  };
}

McsStepper::McsStepper(SplitOperators ops, double theta, double dtau)
    : ops_(std::move(ops)), theta_(theta), dtau_(dtau) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  if (!(dtau >= 0.0)) throw std::invalid_argument("dtau must be non-negative");
  lu_x_ = factor_stage(ops_.fx, ops_.dirichlet, theta_ * dtau_);
  lu_nu_ = factor_stage(ops_.fnu, ops_.dirichlet, theta_ * dtau_);
}

void McsStepper::impose(Field& f, const DirichletValue& boundary, double tau) const {
  const std::size_t nj = ops_.grid.nu_nodes();
  for (std::size_t n = 0; n < f.size(); ++n) {
    if (ops_.dirichlet[n]) f[n] = boundary(n / nj, n % nj, tau);
  }
}

void McsStepper::solve_lines(const std::vector<BandedLu>& lu, const DirectionalOperator& op, Field& rhs) const {
  const std::size_t s = op.stride();
  double* data = rhs.values().data();
  for (std::size_t line = 0; line < lu.size(); ++line) lu[line].solve(data + op.line_start(line), s);
}

Field McsStepper::step(const Field& v, double tau, const DirichletValue& boundary, const Field* source) const {
  const double dt = dtau_;
  const double th = theta_;
  const double tau_next = tau + dt;

  const Field f0v = ops_.f0.apply(v);
  const Field fxv = ops_.fx.apply(v);
  const Field fnuv = ops_.fnu.apply(v);

  Field y0 = v;
  axpy(y0, dt, f0v);
  axpy(y0, dt, fxv);
  axpy(y0, dt, fnuv);
  if (source != nullptr) axpy(y0, dt, *source);

  Field y = y0;
  axpy(y, -th * dt, fxv);
  impose(y, boundary, tau_next);
  solve_lines(lu_x_, ops_.fx, y);
  axpy(y, -th * dt, fnuv);
  impose(y, boundary, tau_next);
  solve_lines(lu_nu_, ops_.fnu, y);
  const Field& y_nu = y;

  // Ytilde0 = Y0 + theta dt (F0 Ynu - F0 v) + (1/2 - theta) dt (F Ynu - F v)
  const Field f0y = ops_.f0.apply(y_nu);
  const Field fxy = ops_.fx.apply(y_nu);
  const Field fnuy = ops_.fnu.apply(y_nu);
  Field z = y0;
  const double corr = (0.5 - th) * dt;
  for (std::size_t n = 0; n < z.size(); ++n) {
    const double d0 = f0y[n] - f0v[n];
    z[n] += th * dt * d0 + corr * (d0 + (fxy[n] - fxv[n]) + (fnuy[n] - fnuv[n]));
  }

  axpy(z, -th * dt, fxv);
  impose(z, boundary, tau_next);
  solve_lines(lu_x_, ops_.fx, z);
  axpy(z, -th * dt, fnuv);
  impose(z, boundary, tau_next);
  solve_lines(lu_nu_, ops_.fnu, z);
  impose(z, boundary, tau_next);
  return z;
}

Field mcs_step(const Field& v, std::size_t k, const SplitOperators& ops, double theta, double dtau,
               const DirichletValue& boundary) {
  const McsStepper stepper(ops, theta, dtau);
  return stepper.step(v, static_cast<double>(k) * dtau, boundary);
}

Trajectory solve_forward(const HestonParams& params, const MarketSpec& market, const Grid& grid, double theta) {
  const McsStepper stepper(assemble_operators(params, market, grid), theta, grid.dtau);
  const DirichletValue boundary = put_boundary(market);

  Trajectory traj{grid, {}};
  traj.fields.reserve(grid.n_tau + 1);
  // Level 0 is the payoff everywhere; the Dirichlet values take over from
  // the first step on.
  Field v = initial_condition(grid, market);
  traj.fields.push_back(v);
  for (std::size_t k = 0; k < grid.n_tau; ++k) {
    v = stepper.step(v, grid.tau(k), boundary);
    if (!v.all_finite()) {
      throw SolverError("forward solve produced non-finite values at step " + std::to_string(k + 1));
    }
    traj.fields.push_back(v);
  }
  return traj;
}

double interpolate(const Field& field, const Grid& grid, double x, double nu) {
  const double eps = 1e-12;
  if (!(x >= grid.x_min - eps && x <= grid.x_max + eps)) {
    throw std::out_of_range("log-price " + std::to_string(x) + " outside [x_min, x_max]");
  }
  if (!(nu >= -eps && nu <= grid.nu_max + eps)) {
    throw std::out_of_range("variance " + std::to_string(nu) + " outside [0, nu_max]");
  }
  const double sx = std::clamp((x - grid.x_min) / grid.dx, 0.0, static_cast<double>(grid.n_x));
  const double sn = std::clamp(nu / grid.dnu, 0.0, static_cast<double>(grid.n_nu));
  const auto i = std::min(static_cast<std::size_t>(sx), grid.n_x - 1);
  const auto j = std::min(static_cast<std::size_t>(sn), grid.n_nu - 1);
  const double tx = sx - static_cast<double>(i);
  const double tn = sn - static_cast<double>(j);
  return (1 - tx) * (1 - tn) * field(i, j) + tx * (1 - tn) * field(i + 1, j) + (1 - tx) * tn * field(i, j + 1) +
         tx * tn * field(i + 1, j + 1);
}

double interpolate_price(const Trajectory& traj, double s0, double nu0, std::size_t k) {
  if (!(s0 > 0.0)) throw std::out_of_range("spot must be positive");
  if (k >= traj.fields.size()) throw std::out_of_range("time index beyond trajectory");
  return interpolate(traj.fields[k], traj.grid, std::log(s0), nu0);
}

}  // namespace hestoncal
