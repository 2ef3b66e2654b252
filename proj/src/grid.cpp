#include "hestoncal/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hestoncal {

Grid build_grid(const MarketSpec& market, std::size_t n_x, std::size_t n_nu, std::size_t n_tau,
                const TruncationConfig& truncation) {
  market.validate();
  if (n_x < 4 || n_nu < 4 || n_tau < 1) {
    throw std::invalid_argument("grid needs n_x, n_nu >= 4 and n_tau >= 1 (got " + std::to_string(n_x) + ", " +
                                std::to_string(n_nu) + ", " + std::to_string(n_tau) + ")");
  }
  const double log_k = std::log(market.strike);
  const double x_min = truncation.x_min.value_or(log_k - TruncationConfig::kDefaultLogHalfWidth);
  const double x_max = truncation.x_max.value_or(log_k + TruncationConfig::kDefaultLogHalfWidth);
  if (!(x_min < log_k && log_k < x_max)) {
    throw std::invalid_argument("truncation must keep ln K strictly inside [x_min, x_max]");
  }
  if (!(truncation.nu_max > 0.0) || !std::isfinite(truncation.nu_max)) {
    throw std::invalid_argument("nu_max must be positive");
  }

  Grid g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.nu_max = truncation.nu_max;
  g.maturity = market.maturity;
  g.n_x = n_x;
  g.n_nu = n_nu;
  g.n_tau = n_tau;
  g.dx = (x_max - x_min) / static_cast<double>(n_x);
  g.dnu = truncation.nu_max / static_cast<double>(n_nu);
  g.dtau = market.maturity / static_cast<double>(n_tau);
  return g;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": fields live on different grids");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field trapezoid_weights(const Grid& grid) {
  Field w(grid);
  for (std::size_t i = 0; i <= grid.n_x; ++i) {
    const double wx = (i == 0 || i == grid.n_x) ? 0.5 * grid.dx : grid.dx;
    for (std::size_t j = 0; j <= grid.n_nu; ++j) {
      const double wn = (j == 0 || j == grid.n_nu) ? 0.5 * grid.dnu : grid.dnu;
      w(i, j) = wx * wn;
    }
  }
  return w;
}

std::vector<double> time_weights(const Grid& grid) {
  std::vector<double> w(grid.n_tau + 1, grid.dtau);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

std::array<double, 3> upwind_first_nu(double a, double dnu) {
  if (a > 0.0) return {0.0, -a / dnu, a / dnu};
  if (a < 0.0) return {-a / dnu, a / dnu, 0.0};
  return {0.0, 0.0, 0.0};
}

void DirectionalOperator::apply(const Field& in, Field& out) const {
  const auto n_lines = line_count();
  const auto len = static_cast<std::ptrdiff_t>(line_length());
  const auto s = static_cast<std::ptrdiff_t>(stride());
  const double* x = in.values().data();
  double* y = out.values().data();
  auto edge = [&](std::ptrdiff_t start, std::ptrdiff_t p) {
    const Row& r = rows_[static_cast<std::size_t>(start + p * s)];
    double acc = 0.0;
    for (std::ptrdiff_t o = -kHalfBand; o <= kHalfBand; ++o) {
      const std::ptrdiff_t q = p + o;
      if (q < 0 || q >= len) continue;
      acc += r[static_cast<std::size_t>(o + kHalfBand)] * x[start + q * s];
    }
    y[start + p * s] = acc;
  };
  for (std::size_t line = 0; line < n_lines; ++line) {
    const auto start = static_cast<std::ptrdiff_t>(line_start(line));
    const std::ptrdiff_t lo = std::min<std::ptrdiff_t>(kHalfBand, len);
    const std::ptrdiff_t hi = std::max<std::ptrdiff_t>(lo, len - kHalfBand);
    for (std::ptrdiff_t p = 0; p < lo; ++p) edge(start, p);
    for (std::ptrdiff_t p = lo; p < hi; ++p) {
      const std::ptrdiff_t n = start + p * s;
      const Row& r = rows_[static_cast<std::size_t>(n)];
      y[n] = r[0] * x[n - 2 * s] + r[1] * x[n - s] + r[2] * x[n] + r[3] * x[n + s] + r[4] * x[n + 2 * s];
    }
    for (std::ptrdiff_t p = hi; p < len; ++p) edge(start, p);
  }
}

Field DirectionalOperator::apply(const Field& in) const {
  Field out(in.x_nodes(), in.nu_nodes());
  apply(in, out);
  return out;
}

void MixedOperator::apply(const Field& in, Field& out) const {
  const std::size_t nj = nu_nodes_;
  const std::size_t ni = x_nodes_;
  const double* x = in.values().data();
  double* y = out.values().data();
  for (std::size_t i = 0; i < ni; ++i) {
    const bool inner_i = i > 0 && i + 1 < ni;
    for (std::size_t j = 0; j < nj; ++j) {
      const std::size_t n = i * nj + j;
      const Row& r = rows_[n];
      if (inner_i && j > 0 && j + 1 < nj) {
        y[n] = r[0] * x[n + nj + 1] + r[1] * x[n + nj - 1] + r[2] * x[n - nj + 1] + r[3] * x[n - nj - 1];
        continue;
      }
      // Weights towards neighbours outside the mesh are zero; skip them
      // before indexing.
      double acc = 0.0;
      if (i + 1 < ni && j + 1 < nj) acc += r[0] * x[n + nj + 1];
      if (i + 1 < ni && j > 0) acc += r[1] * x[n + nj - 1];
      if (i > 0 && j + 1 < nj) acc += r[2] * x[n - nj + 1];
      if (i > 0 && j > 0) acc += r[3] * x[n - nj - 1];
      y[n] = acc;
    }
  }
}

Field MixedOperator::apply(const Field& in) const {
  Field out(in.x_nodes(), in.nu_nodes());
  apply(in, out);
  return out;
}

void SplitOperators::apply(const Field& in, Field& out) const {
  Field tmp(in.x_nodes(), in.nu_nodes());
  f0.apply(in, out);
  fx.apply(in, tmp);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += tmp[n];
  fnu.apply(in, tmp);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += tmp[n];
}

Field SplitOperators::apply(const Field& in) const {
  Field out(in.x_nodes(), in.nu_nodes());
  apply(in, out);
  return out;
}

SplitOperators assemble_operators(const HestonParams& params, const MarketSpec& market, const Grid& grid) {
  params.validate();
  market.validate();
  const double r = market.rate;
  const double q = market.dividend;
  const double dx = grid.dx;
  const double dnu = grid.dnu;
  const std::size_t nx = grid.n_x;
  const std::size_t nn = grid.n_nu;
  constexpr std::size_t c = DirectionalOperator::kHalfBand;

  SplitOperators ops{grid, MixedOperator(grid), DirectionalOperator(grid, Direction::kX),
                     DirectionalOperator(grid, Direction::kNu), std::vector<std::uint8_t>(grid.size(), 0)};

  for (std::size_t j = 0; j <= nn; ++j) {
    ops.dirichlet[grid.index(0, j)] = 1;
    ops.dirichlet[grid.index(nx, j)] = 1;
  }

  const double mixed_scale = params.sigma * params.rho / (4.0 * dx * dnu);
  for (std::size_t i = 1; i < nx; ++i) {
    for (std::size_t j = 0; j <= nn; ++j) {
      const double nu = grid.nu(j);

      // x-direction: identical formula on every nu-line; at nu = 0 it reduces to
      // (r-q) V_x - r V and at nu_max it is the asymptotic row.
      auto& rx = ops.fx.row(i, j);
      const double diff_x = 0.5 * nu / (dx * dx);
      const double drift_x = (r - q - 0.5 * nu) / (2.0 * dx);
      rx[c - 1] = diff_x - drift_x;
      rx[c] = -2.0 * diff_x - r;
      rx[c + 1] = diff_x + drift_x;

      auto& rn = ops.fnu.row(i, j);
      if (j == 0) {
        const double a = params.kappa * params.mu / (2.0 * dnu);
        rn[c] = -3.0 * a;
        rn[c + 1] = 4.0 * a;
        rn[c + 2] = -a;
      } else if (j < nn) {
        const double diff_nu = 0.5 * params.sigma * params.sigma * nu / (dnu * dnu);
        const auto up = upwind_first_nu(params.kappa * (params.mu - nu), dnu);
        rn[c - 1] = diff_nu + up[0];
        rn[c] = -2.0 * diff_nu + up[1];
        rn[c + 1] = diff_nu + up[2];

        const double m = mixed_scale * nu;
        ops.f0.row(i, j) = {m, -m, -m, m};
      }
    }
  }
  return ops;
}

}  // namespace hestoncal
