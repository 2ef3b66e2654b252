#include "hestoncal/gradient.hpp"

#include <vector>

namespace hestoncal {

namespace {

void check_inputs(const Trajectory& v, const Trajectory& phi, const Grid& grid) {
  require_same_grid(v.grid, grid, "gradient (state)");
  require_same_grid(phi.grid, grid, "gradient (adjoint)");
  if (v.fields.size() != grid.n_tau + 1 || phi.fields.size() != grid.n_tau + 1) {
    throw GridMismatch("gradient: trajectory length does not match n_tau + 1");
  }
}

// sum_k wt_k sum_n w_n phi_n (d_u F V)_n over rows owned by the operator.
Gradient4 lagrangian_pairing(const Trajectory& v, const Trajectory& phi, const HestonParams& p, const Grid& grid) {
  const Field w = trapezoid_weights(grid);
  const std::vector<double> wt = time_weights(grid);
  const double dx = grid.dx;
  const double dnu = grid.dnu;
  const std::size_t nx = grid.n_x;
  const std::size_t nn = grid.n_nu;
  ParamVector acc{};
  for (std::size_t k = 0; k <= grid.n_tau; ++k) {
    const Field& f = v[k];
    const Field& y = phi[k];
    ParamVector slab{};
    for (std::size_t i = 1; i < nx; ++i) {
      for (std::size_t j = 0; j < nn; ++j) {
        const double wy = w(i, j) * y(i, j);
        if (wy == 0.0) continue;
        const double nu = grid.nu(j);
        if (j == 0) {
          const double d = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * dnu);
          slab[kKappa] += wy * p.mu * d;
          slab[kMu] += wy * p.kappa * d;
          continue;
        }
        const double vnn = (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) / (dnu * dnu);
        const double vxn = (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) / (4.0 * dx * dnu);
        const double a = p.kappa * (p.mu - nu);
        double d = 0.0;
        if (a > 0.0) {
          d = (f(i, j + 1) - f(i, j)) / dnu;
        } else if (a < 0.0) {
          d = (f(i, j) - f(i, j - 1)) / dnu;
        } else {
          d = (f(i, j + 1) - f(i, j - 1)) / (2.0 * dnu);
        }
        slab[kSigma] += wy * (p.sigma * nu * vnn + p.rho * nu * vxn);
        slab[kRho] += wy * p.sigma * nu * vxn;
        slab[kKappa] += wy * (p.mu - nu) * d;
        slab[kMu] += wy * p.kappa * d;
      }
    }
    for (std::size_t c = 0; c < 4; ++c) acc[c] += wt[k] * slab[c];
  }
  return Gradient4::from_vector(acc);
}

// Derivative along one axis: central inside, second-order one-sided at the ends.
Field derivative(const Field& f, const Grid& grid, Direction dir) {
  Field out(grid);
  const bool along_x = dir == Direction::kX;
  const std::size_t len = along_x ? grid.x_nodes() : grid.nu_nodes();
  const std::size_t lines = along_x ? grid.nu_nodes() : grid.x_nodes();
  const double h = along_x ? grid.dx : grid.dnu;
  for (std::size_t l = 0; l < lines; ++l) {
    auto at = [&](std::size_t p) -> std::size_t { return along_x ? grid.index(p, l) : grid.index(l, p); };
    out[at(0)] = (-3.0 * f[at(0)] + 4.0 * f[at(1)] - f[at(2)]) / (2.0 * h);
    for (std::size_t p = 1; p + 1 < len; ++p) out[at(p)] = (f[at(p + 1)] - f[at(p - 1)]) / (2.0 * h);
    out[at(len - 1)] = (3.0 * f[at(len - 1)] - 4.0 * f[at(len - 2)] + f[at(len - 3)]) / (2.0 * h);
  }
  return out;
}

// Closed-form volume and boundary integrals after integration by parts.
Gradient4 printed_integrals(const Trajectory& v, const Trajectory& phi, const HestonParams& p, const Grid& grid) {
  const Field w = trapezoid_weights(grid);
  const std::vector<double> wt = time_weights(grid);
  const double s = p.sigma;
  const double rho = p.rho;
  const double ka = p.kappa;
  const double mu = p.mu;
  const std::size_t nx = grid.n_x;
  const std::size_t nn = grid.n_nu;

  // 1-D trapezoid weights along the x- and nu-edges.
  std::vector<double> ex(nx + 1, grid.dx);
  std::vector<double> en(nn + 1, grid.dnu);
  ex.front() *= 0.5;
  ex.back() *= 0.5;
  en.front() *= 0.5;
  en.back() *= 0.5;

  ParamVector acc{};
  for (std::size_t k = 0; k <= grid.n_tau; ++k) {
    const Field& f = v[k];
    const Field& y = phi[k];
    const Field fx = derivative(f, grid, Direction::kX);
    const Field fn = derivative(f, grid, Direction::kNu);
    const Field yx = derivative(y, grid, Direction::kX);
    const Field yn = derivative(y, grid, Direction::kNu);

    ParamVector slab{};
    for (std::size_t n = 0; n < f.size(); ++n) {
      const double nu = grid.nu(n % grid.nu_nodes());
      const double vp = f[n] * y[n];
      slab[kSigma] += w[n] * (0.5 * nu * (s * fn[n] * yn[n] + rho * (fx[n] * yn[n] + fn[n] * yx[n])) +
                              0.25 * (rho * (y[n] * fx[n] - f[n] * yx[n]) + s * (fn[n] * y[n] - f[n] * yn[n])));
      slab[kRho] += w[n] * (0.5 * nu * s * (fx[n] * yn[n] + fn[n] * yx[n]) + 0.25 * s * (fx[n] * y[n] - f[n] * yx[n]));
      slab[kKappa] += w[n] * (0.5 * (mu - nu) * (f[n] * yn[n] - fn[n] * y[n]) - 0.5 * vp);
      slab[kMu] += w[n] * 0.5 * ka * (f[n] * yn[n] - fn[n] * y[n]);
    }

    auto edge = [&](std::size_t n, double weight, bool gamma_c) {
      const double nu = grid.nu(n % grid.nu_nodes());
      const double vp = f[n] * y[n];
      slab[kSigma] += weight * (0.25 * (s + rho) * vp - 0.5 * nu * ((s + rho) * fn[n] + rho * fx[n]) * y[n]);
      slab[kRho] += weight * (0.25 * s * vp - 0.5 * nu * s * y[n] * (fx[n] + fn[n]));
      slab[kKappa] += weight * (-0.5 * (mu - nu) * vp);
      slab[kMu] += weight * (-0.5 * ka * vp);
      if (gamma_c) {
        slab[kKappa] -= weight * mu * fn[n] * y[n];
        slab[kMu] -= weight * ka * fn[n] * y[n];
      }
    };
    for (std::size_t j = 0; j <= nn; ++j) {
      edge(grid.index(0, j), en[j], false);
      edge(grid.index(nx, j), en[j], false);
    }
    for (std::size_t i = 0; i <= nx; ++i) {
      edge(grid.index(i, 0), ex[i], true);
      edge(grid.index(i, nn), ex[i], false);
    }
    for (std::size_t c = 0; c < 4; ++c) acc[c] += wt[k] * slab[c];
  }
  return Gradient4::from_vector(acc);
}

}  // namespace

Gradient4 constraint_derivatives(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                                 const MarketSpec& market, const Grid& grid, GradientForm form) {
  market.validate();
  check_inputs(v, phi, grid);
  if (form == GradientForm::kPrinted) return printed_integrals(v, phi, params, grid);
  const Gradient4 pairing = lagrangian_pairing(v, phi, params, grid);
  return {-pairing.sigma, -pairing.rho, -pairing.kappa, -pairing.mu};
}

double gradient_sigma(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                      const MarketSpec& market, const Grid& grid, GradientForm form) {
  return constraint_derivatives(v, phi, params, market, grid, form).sigma;
}

double gradient_rho(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                    const MarketSpec& market, const Grid& grid, GradientForm form) {
  return constraint_derivatives(v, phi, params, market, grid, form).rho;
}

double gradient_kappa(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                      const MarketSpec& market, const Grid& grid, GradientForm form) {
  return constraint_derivatives(v, phi, params, market, grid, form).kappa;
}

double gradient_mu(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                   const MarketSpec& market, const Grid& grid, GradientForm form) {
  return constraint_derivatives(v, phi, params, market, grid, form).mu;
}

Gradient4 assemble_gradient(const Trajectory& v, const Trajectory& phi, const HestonParams& params,
                            const MarketSpec& market, const Grid& grid, double lambda,
                            const std::optional<HestonParams>& u_ref, GradientForm form) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  const ParamVector d = constraint_derivatives(v, phi, params, market, grid, form).to_vector();
  ParamVector g{};
  const ParamVector u = params.to_vector();
  const ParamVector ur = u_ref ? u_ref->to_vector() : ParamVector{};
  const bool tikhonov = lambda > 0.0 && u_ref.has_value();
  for (std::size_t c = 0; c < 4; ++c) g[c] = (tikhonov ? lambda * (u[c] - ur[c]) : 0.0) - d[c];
  return Gradient4::from_vector(g);
}

}  // namespace hestoncal
