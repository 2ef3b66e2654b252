#include "hestoncal/adjoint_solver.hpp"

#include <string>

namespace hestoncal {

namespace {

constexpr std::size_t kC = DirectionalOperator::kHalfBand;

// A*_{mn} = F_{nm} w_n / w_m restricted to non-Dirichlet rows and columns.
DirectionalOperator dual(const DirectionalOperator& f, const Grid& grid, const Field& w,
                         const std::vector<std::uint8_t>& dirichlet) {
  DirectionalOperator out(grid, f.direction());
  const auto len = static_cast<std::ptrdiff_t>(f.line_length());
  const std::size_t s = f.stride();
  constexpr int h = DirectionalOperator::kHalfBand;
  for (std::size_t line = 0; line < f.line_count(); ++line) {
    const std::size_t start = f.line_start(line);
    for (std::ptrdiff_t p = 0; p < len; ++p) {
      const std::size_t m = start + static_cast<std::size_t>(p) * s;
      if (dirichlet[m]) continue;
      auto& row = out.row(m);
      for (int o = -h; o <= h; ++o) {
        const std::ptrdiff_t q = p + o;
        if (q < 0 || q >= len) continue;
        const std::size_t n = start + static_cast<std::size_t>(q) * s;
        if (dirichlet[n]) continue;
        row[static_cast<std::size_t>(h + o)] = f.row(n)[static_cast<std::size_t>(h - o)] * w[n] / w[m];
      }
    }
  }
  return out;
}

MixedOperator dual(const MixedOperator& f, const Grid& grid, const Field& w,
                   const std::vector<std::uint8_t>& dirichlet) {
  MixedOperator out(grid);
  // Slot k addresses neighbour (di, dj); slot 3 - k addresses (-di, -dj).
  constexpr int di[4] = {1, 1, -1, -1};
  constexpr int dj[4] = {1, -1, 1, -1};
  const auto nx = static_cast<std::ptrdiff_t>(grid.n_x);
  const auto nn = static_cast<std::ptrdiff_t>(grid.n_nu);
  for (std::ptrdiff_t i = 0; i <= nx; ++i) {
    for (std::ptrdiff_t j = 0; j <= nn; ++j) {
      const std::size_t m = grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (dirichlet[m]) continue;
      auto& row = out.row(m);
      for (std::size_t k = 0; k < 4; ++k) {
        const std::ptrdiff_t ii = i + di[k];
        const std::ptrdiff_t jj = j + dj[k];
        if (ii < 0 || ii > nx || jj < 0 || jj > nn) continue;
        const std::size_t n = grid.index(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
        if (dirichlet[n]) continue;
        row[k] = f.row(n)[3 - k] * w[n] / w[m];
      }
    }
  }
  return out;
}

SplitOperators conservative(const HestonParams& params, const MarketSpec& market, const Grid& grid) {
  const SplitOperators f = assemble_operators(params, market, grid);
  const Field w = trapezoid_weights(grid);
  return SplitOperators{grid, dual(f.f0, grid, w, f.dirichlet), dual(f.fx, grid, w, f.dirichlet),
                        dual(f.fnu, grid, w, f.dirichlet), f.dirichlet};
}

SplitOperators expanded(const HestonParams& params, const MarketSpec& market, const Grid& grid) {
  params.validate();
  market.validate();
  const double r = market.rate;
  const double q = market.dividend;
  const double s = params.sigma;
  const double dx = grid.dx;
  const double dnu = grid.dnu;
  const std::size_t nx = grid.n_x;
  const std::size_t nn = grid.n_nu;

  SplitOperators ops{grid, MixedOperator(grid), DirectionalOperator(grid, Direction::kX),
                     DirectionalOperator(grid, Direction::kNu), std::vector<std::uint8_t>(grid.size(), 0)};
  for (std::size_t j = 0; j <= nn; ++j) {
    ops.dirichlet[grid.index(0, j)] = 1;
    ops.dirichlet[grid.index(nx, j)] = 1;
  }
  for (std::size_t i = 0; i <= nx; ++i) ops.dirichlet[grid.index(i, 0)] = 1;

  const double mixed_scale = s * params.rho / (4.0 * dx * dnu);
  for (std::size_t i = 1; i < nx; ++i) {
    for (std::size_t j = 1; j <= nn; ++j) {
      const double nu = grid.nu(j);
      const double diff_x = 0.5 * nu / (dx * dx);
      double drift_x = 0.0;
      double zeroth = 0.0;
      if (j == nn) {
        drift_x = -(r - q - 0.5 * nu);
      } else {
        drift_x = q - r + 0.5 * nu + s * params.rho;
        zeroth = params.kappa - r;
      }
      auto& rx = ops.fx.row(i, j);
      rx[kC - 1] = diff_x - drift_x / (2.0 * dx);
      rx[kC] = -2.0 * diff_x + zeroth;
      rx[kC + 1] = diff_x + drift_x / (2.0 * dx);
      if (j == nn) continue;

      auto& rn = ops.fnu.row(i, j);
      const double diff_nu = 0.5 * s * s * nu / (dnu * dnu);
      const auto up = upwind_first_nu(s * s - params.kappa * (params.mu - nu), dnu);
      rn[kC - 1] = diff_nu + up[0];
      rn[kC] = -2.0 * diff_nu + up[1];
      rn[kC + 1] = diff_nu + up[2];

      const double m = mixed_scale * nu;
      ops.f0.row(i, j) = {m, -m, -m, m};
    }
  }
  return ops;
}

}  // namespace

ResidualTrajectory residual(const Trajectory& v, const Trajectory& v_d) {
  require_same_grid(v.grid, v_d.grid, "residual");
  if (v.fields.size() != v_d.fields.size()) throw GridMismatch("residual: trajectories differ in length");
  ResidualTrajectory res{v.grid, {}};
  res.fields.reserve(v.fields.size());
  for (std::size_t k = 0; k < v.fields.size(); ++k) {
    Field d = v.fields[k];
    for (std::size_t n = 0; n < d.size(); ++n) d[n] -= v_d.fields[k][n];
    res.fields.push_back(std::move(d));
  }
  return res;
}

SplitOperators assemble_adjoint_operators(const HestonParams& params, const MarketSpec& market, const Grid& grid,
                                          AdjointScheme scheme) {
  return scheme == AdjointScheme::kConservative ? conservative(params, market, grid)
                                                : expanded(params, market, grid);
}

Trajectory solve_adjoint(const HestonParams& params, const MarketSpec& market, const Grid& grid,
                         const ResidualTrajectory& res, AdjointScheme scheme, double theta) {
  require_same_grid(grid, res.grid, "solve_adjoint");
  if (res.fields.size() != grid.n_tau + 1) throw GridMismatch("solve_adjoint: residual has wrong length");

  const McsStepper stepper(assemble_adjoint_operators(params, market, grid, scheme), theta, grid.dtau);
  const DirichletValue zero = [](std::size_t, std::size_t, double) { return 0.0; };
  const auto& mask = stepper.operators().dirichlet;

  Trajectory traj{grid, std::vector<Field>(grid.n_tau + 1, Field(grid))};
  Field source(grid);
  for (std::size_t k = grid.n_tau; k > 0; --k) {
    const Field& a = res.fields[k];
    const Field& b = res.fields[k - 1];
    for (std::size_t n = 0; n < source.size(); ++n) source[n] = mask[n] ? 0.0 : 0.5 * (a[n] + b[n]);
    const double s = grid.tau(grid.n_tau - k);
    Field next = stepper.step(traj.fields[k], s, zero, &source);
    if (!next.all_finite()) {
      throw SolverError("adjoint solve produced non-finite values at step " + std::to_string(k - 1));
    }
    traj.fields[k - 1] = std::move(next);
  }
  return traj;
}

}  // namespace hestoncal
