#include "hestoncal/oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace hestoncal {

namespace {

using cplx = std::complex<double>;

struct GaussLegendre {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

GaussLegendre gauss_legendre(std::size_t n) {
  GaussLegendre gl{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p0) /
                          static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    gl.x[i] = -z;
    gl.x[n - 1 - i] = z;
    gl.w[i] = wi;
    gl.w[n - 1 - i] = wi;
  }
  return gl;
}

const GaussLegendre& panel_rule() {
  static const GaussLegendre rule = gauss_legendre(QuadratureSpec::kPanelNodes);
  return rule;
}

// E[exp(i u ln S_T)] in the little-trap form.
cplx char_fn(cplx u, double s0, double nu0, const MarketSpec& m, const HestonParams& p) {
  const cplx i(0.0, 1.0);
  const double t = m.maturity;
  const double s2 = p.sigma * p.sigma;
  const cplx b = p.kappa - p.rho * p.sigma * i * u;
  const cplx d = std::sqrt(b * b + s2 * (i * u + u * u));
  const cplx g = (b - d) / (b + d);
  const cplx e = std::exp(-d * t);
  const cplx c = (m.rate - m.dividend) * i * u * t +
                 p.kappa * p.mu / s2 * ((b - d) * t - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
  const cplx dd = (b - d) / s2 * (1.0 - e) / (1.0 - g * e);
  return std::exp(c + dd * nu0 + i * u * std::log(s0));
}

// Call price with the Fourier integrals truncated at `upper` and `panels`
// 32-point Gauss-Legendre panels.
double call_price(double s0, double nu0, const MarketSpec& m, const HestonParams& p, double upper,
                  std::size_t panels) {
  const cplx i(0.0, 1.0);
  const double log_k = std::log(m.strike);
  const cplx norm1 = char_fn(-i, s0, nu0, m, p);
  const GaussLegendre& gl = panel_rule();
  const double width = upper / static_cast<double>(panels);
  double i1 = 0.0;
  double i2 = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double a = width * static_cast<double>(k);
    for (std::size_t n = 0; n < gl.x.size(); ++n) {
      const double u = a + 0.5 * width * (gl.x[n] + 1.0);
      const double wt = 0.5 * width * gl.w[n];
      const cplx kernel = std::exp(-i * u * log_k) / (i * u);
      i1 += wt * (kernel * char_fn(cplx(u, -1.0), s0, nu0, m, p) / norm1).real();
      i2 += wt * (kernel * char_fn(cplx(u, 0.0), s0, nu0, m, p)).real();
    }
  }
  const double p1 = 0.5 + i1 / std::numbers::pi;
  const double p2 = 0.5 + i2 / std::numbers::pi;
  const double t = m.maturity;
  return s0 * std::exp(-m.dividend * t) * p1 - m.strike * std::exp(-m.rate * t) * p2;
}

void check_pricing_inputs(double s0, double nu0, const MarketSpec& market, const HestonParams& params) {
  market.validate();
  params.validate();
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw std::invalid_argument("spot must be positive");
  if (!(nu0 >= 0.0) || !std::isfinite(nu0)) throw std::invalid_argument("initial variance must be >= 0");
  if (!params.feller()) throw std::invalid_argument("analytic pricer requires the Feller condition");
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(upper > 0.0) || !std::isfinite(upper)) throw std::invalid_argument("quadrature upper bound must be > 0");
  if (nodes < kPanelNodes) throw std::invalid_argument("quadrature needs at least 32 nodes");
  if (!(tolerance > 0.0)) throw std::invalid_argument("quadrature tolerance must be > 0");
  if (max_nodes < nodes) throw std::invalid_argument("max_nodes must be >= nodes");
}

double heston_analytic_call(double s0, double nu0, const MarketSpec& market, const HestonParams& params,
                            const QuadratureSpec& quad) {
  check_pricing_inputs(s0, nu0, market, params);
  quad.validate();
  std::size_t panels = (quad.nodes + QuadratureSpec::kPanelNodes - 1) / QuadratureSpec::kPanelNodes;
  double upper = quad.upper;
  double price = call_price(s0, nu0, market, params, upper, panels);
  if (quad.scheme == QuadratureSpec::Scheme::kFixed) {
    if (!std::isfinite(price)) throw QuadratureError("non-finite Fourier integral");
    return price;
  }
  double change = 0.0;
  // Each round extends the range and halves the panel width, so both the
  // truncation and the resolution of the oscillating kernel improve.
  while (4 * panels * QuadratureSpec::kPanelNodes <= quad.max_nodes) {
    panels *= 4;
    upper *= 2.0;
    const double next = call_price(s0, nu0, market, params, upper, panels);
    change = std::abs(next - price);
    price = next;
    if (change < quad.tolerance && std::isfinite(price)) return price;
  }
  throw QuadratureError("Fourier integrals did not settle: last change " + std::to_string(change) + " with " +
                        std::to_string(panels * QuadratureSpec::kPanelNodes) + " nodes");
}

double heston_analytic_put(double s0, double nu0, const MarketSpec& market, const HestonParams& params,
                           const QuadratureSpec& quad) {
  const double call = heston_analytic_call(s0, nu0, market, params, quad);
  const double t = market.maturity;
  return call - s0 * std::exp(-market.dividend * t) + market.strike * std::exp(-market.rate * t);
}

double black_scholes_put(double s0, double vol, const MarketSpec& market) {
  market.validate();
  if (!(s0 > 0.0) || !(vol > 0.0)) throw std::invalid_argument("black_scholes_put needs s0 > 0 and vol > 0");
  const double t = market.maturity;
  const double sq = vol * std::sqrt(t);
  const double d1 = (std::log(s0 / market.strike) + (market.rate - market.dividend + 0.5 * vol * vol) * t) / sq;
  const double d2 = d1 - sq;
  auto ncdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  return market.strike * std::exp(-market.rate * t) * ncdf(-d2) - s0 * std::exp(-market.dividend * t) * ncdf(-d1);
}

Gradient4 finite_difference_gradient(const CostFunction& j, const ParamVector& u, double h, const ParamBox& box) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
  ParamVector g{};
  for (std::size_t c = 0; c < 4; ++c) {
    const double hc = h * std::abs(u[c]);
    if (hc == 0.0) throw std::invalid_argument(std::string("zero finite-difference step for ") + kParamNames[c]);
    ParamVector up = u;
    ParamVector dn = u;
    up[c] += hc;
    dn[c] -= hc;
    if (!box.contains(up) || !box.contains(dn)) {
      throw std::domain_error(std::string("finite-difference probe for ") + kParamNames[c] + " leaves the box");
    }
    g[c] = (j(up) - j(dn)) / (2.0 * hc);
  }
  return Gradient4::from_vector(g);
}

Gradient4 finite_difference_gradient(const HestonParams& u, const Trajectory& v_d, const MarketSpec& market,
                                     const Grid& grid, const CalibConfig& cfg, double h) {
  require_same_grid(grid, v_d.grid, "finite_difference_gradient");
  const CostFunction j = [&](const ParamVector& x) {
    const HestonParams p = HestonParams::from_vector(x);
    return cost(solve_forward(p, market, grid, cfg.theta), v_d, p, cfg);
  };
  return finite_difference_gradient(j, u.to_vector(), h, cfg.box);
}

}  // namespace hestoncal
