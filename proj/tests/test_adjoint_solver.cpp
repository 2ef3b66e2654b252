#include "doctest.h"

#include <cmath>

#include "hestoncal/adjoint_solver.hpp"
#include "stage_oracle.hpp"

using namespace hestoncal;

namespace {

template <class F>
Field sample(const Grid& g, F f) {
  Field out(g);
  for (std::size_t i = 0; i <= g.n_x; ++i)
    for (std::size_t j = 0; j <= g.n_nu; ++j) out(i, j) = f(g.x(i), g.nu(j));
  return out;
}

ResidualTrajectory smooth_residual(const Grid& g, double scale = 1.0) {
  ResidualTrajectory r{g, {}};
  for (std::size_t k = 0; k <= g.n_tau; ++k) {
    const double t = g.tau(k);
    r.fields.push_back(sample(g, [&](double x, double nu) {
      return scale * std::sin(1.3 * x + 0.4) * std::exp(-nu) * (1.0 + t);
    }));
  }
  return r;
}

double space_time_inner(const Grid& g, const std::vector<Field>& a, const std::vector<Field>& b) {
  const Field w = trapezoid_weights(g);
  const auto wt = time_weights(g);
  double s = 0.0;
  for (std::size_t k = 0; k <= g.n_tau; ++k)
    for (std::size_t n = 0; n < w.size(); ++n) s += wt[k] * w[n] * a[k][n] * b[k][n];
  return s;
}

constexpr AdjointScheme kSchemes[] = {AdjointScheme::kConservative, AdjointScheme::kExpanded};

}  // namespace

TEST_CASE("expanded adjoint operator on constants and monomials") {
  const MarketSpec m;
  HestonParams p;
  const Grid g = build_grid(m, 20, 16, 4);
  const double r = m.rate, q = m.dividend;

  SUBCASE("constant") {
    const SplitOperators ops = assemble_adjoint_operators(p, m, g, AdjointScheme::kExpanded);
    const Field out = ops.apply(Field(g, 1.7));
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 1; j < g.n_nu; ++j) CHECK(out(i, j) == doctest::Approx((p.kappa - r) * 1.7).epsilon(1e-11));
  }
  SUBCASE("kappa = r annihilates constants") {
    p.kappa = r;
    const SplitOperators ops = assemble_adjoint_operators(p, m, g, AdjointScheme::kExpanded);
    const Field out = ops.apply(Field(g, 1.7));
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 1; j < g.n_nu; ++j) CHECK(std::abs(out(i, j)) < 1e-12);
  }
  SUBCASE("x * nu") {
    const SplitOperators ops = assemble_adjoint_operators(p, m, g, AdjointScheme::kExpanded);
    const Field out = ops.apply(sample(g, [](double x, double nu) { return x * nu; }));
    const double s = p.sigma, rho = p.rho;
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 1; j < g.n_nu; ++j) {
        const double x = g.x(i), nu = g.nu(j);
        const double mixed = s * rho * nu;                        // sigma rho nu phi_xnu
        const double drift_x = (q - r + 0.5 * nu + s * rho) * nu;  // phi_x = nu
        const double drift_nu = (s * s - p.kappa * (p.mu - nu)) * x;
        const double zeroth = (p.kappa - r) * x * nu;
        CHECK(out(i, j) == doctest::Approx(mixed + drift_x + drift_nu + zeroth).epsilon(1e-10).scale(1.0));
      }
  }
  SUBCASE("boundary rows") {
    const SplitOperators ops = assemble_adjoint_operators(p, m, g, AdjointScheme::kExpanded);
    for (std::size_t i = 0; i <= g.n_x; ++i) CHECK(ops.dirichlet[g.index(i, 0)] == 1);
    // nu_max row: nu/2 phi_xx - (r - q - nu/2) phi_x, nothing else
    const Field out = ops.apply(sample(g, [](double x, double nu) { return x * x + nu; }));
    const double nu = g.nu_max;
    for (std::size_t i = 1; i < g.n_x; ++i)
      CHECK(out(i, g.n_nu) == doctest::Approx(nu - (r - q - 0.5 * nu) * 2.0 * g.x(i)).epsilon(1e-10));
  }
}

TEST_CASE("conservative adjoint is the weighted transpose of the forward operator") {
  const MarketSpec m;
  const HestonParams p{0.7, -0.4, 3.0, 0.2};
  const Grid g = build_grid(m, 12, 10, 4);
  const SplitOperators f = assemble_operators(p, m, g);
  const SplitOperators a = assemble_adjoint_operators(p, m, g, AdjointScheme::kConservative);
  const Field w = trapezoid_weights(g);

  // fields vanishing on the Dirichlet columns
  auto mask = [&](Field x) {
    for (std::size_t n = 0; n < x.size(); ++n)
      if (f.dirichlet[n]) x[n] = 0.0;
    return x;
  };
  const Field u = mask(sample(g, [](double x, double nu) { return std::cos(x) + nu * nu; }));
  const Field v = mask(sample(g, [](double x, double nu) { return std::sin(2 * x) * (1 + nu); }));
  auto inner = [&](const Field& x, const Field& y) {
    double s = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) s += w[n] * x[n] * y[n];
    return s;
  };
  CHECK(inner(a.fx.apply(u), v) == doctest::Approx(inner(u, f.fx.apply(v))).epsilon(1e-12));
  CHECK(inner(a.fnu.apply(u), v) == doctest::Approx(inner(u, f.fnu.apply(v))).epsilon(1e-12));
  CHECK(inner(a.f0.apply(u), v) == doctest::Approx(inner(u, f.f0.apply(v))).epsilon(1e-12));
}

TEST_CASE("adjoint structural invariants") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 24, 20, 10);

  for (AdjointScheme scheme : kSchemes) {
    CAPTURE(static_cast<int>(scheme));
    SUBCASE("zero residual") {
      ResidualTrajectory zero{g, std::vector<Field>(g.n_tau + 1, Field(g))};
      const Trajectory phi = solve_adjoint(p, m, g, zero, scheme);
      for (const Field& f : phi.fields)
        for (double v : f.values()) CHECK(v == 0.0);
    }
    SUBCASE("terminal and boundary values") {
      const Trajectory phi = solve_adjoint(p, m, g, smooth_residual(g), scheme);
      REQUIRE(phi.fields.size() == g.n_tau + 1);
      for (double v : phi[g.n_tau].values()) CHECK(v == 0.0);
      bool edges = true, nonzero = false;
      for (std::size_t k = 0; k <= g.n_tau; ++k) {
        for (std::size_t j = 0; j <= g.n_nu; ++j) edges &= phi[k](0, j) == 0.0 && phi[k](g.n_x, j) == 0.0;
        if (scheme == AdjointScheme::kExpanded)
          for (std::size_t i = 0; i <= g.n_x; ++i) edges &= phi[k](i, 0) == 0.0;
        for (double v : phi[k].values()) nonzero |= v != 0.0;
      }
      CHECK(edges);
      CHECK(nonzero);
      CHECK(phi[0].all_finite());
    }
    SUBCASE("linear in the residual") {
      const Trajectory a = solve_adjoint(p, m, g, smooth_residual(g, 1.0), scheme);
      const Trajectory b = solve_adjoint(p, m, g, smooth_residual(g, -2.5), scheme);
      for (std::size_t k = 0; k <= g.n_tau; ++k)
        for (std::size_t n = 0; n < a[k].size(); ++n)
          CHECK(b[k][n] == doctest::Approx(-2.5 * a[k][n]).epsilon(1e-12).scale(1e-12));
    }
  }
}

TEST_CASE("impulse residual against a sparse single-step oracle") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 16, 12, 6);
  for (AdjointScheme scheme : kSchemes) {
    CAPTURE(static_cast<int>(scheme));
    for (std::size_t kk : {g.n_tau, std::size_t{3}}) {
      ResidualTrajectory res{g, std::vector<Field>(g.n_tau + 1, Field(g))};
      res.fields[kk](7, 5) = 1.0;
      const Trajectory phi = solve_adjoint(p, m, g, res, scheme);

      const SplitOperators ops = assemble_adjoint_operators(p, m, g, scheme);
      Field source(g);
      source(7, 5) = 0.5;
      const DirichletValue zero = [](std::size_t, std::size_t, double) { return 0.0; };
      const Field want = testing::stage_oracle(ops, phi[kk], g.tau(g.n_tau - kk), g.dtau, kDefaultTheta, zero, &source);
      for (std::size_t n = 0; n < want.size(); ++n) CHECK(phi[kk - 1][n] == doctest::Approx(want[n]).scale(1e-14));
      for (std::size_t k = kk + 1; k <= g.n_tau; ++k)
        for (double v : phi[k].values()) CHECK(v == 0.0);
    }
  }
}

namespace {

// <R, dV> against <phi, f> for fields that vanish towards every edge, where
// dV solves the forced tangent problem with the forward stepper.
double duality_gap(const Grid& g, AdjointScheme scheme) {
  const MarketSpec m;
  const HestonParams p;
  const double lk = std::log(m.strike);
  ResidualTrajectory res{g, {}};
  std::vector<Field> f;
  for (std::size_t k = 0; k <= g.n_tau; ++k) {
    const double t = g.tau(k);
    res.fields.push_back(sample(g, [&](double x, double nu) {
      const double y = x - lk;
      return std::exp(-2 * y * y) * nu * std::exp(-4 * nu) * (1 + t);
    }));
    f.push_back(sample(g, [&](double x, double nu) {
      const double y = x - lk - 0.3;
      return std::cos(2 * y) * std::exp(-y * y) * nu * std::exp(-3 * nu) * (2 - t);
    }));
  }
  const SplitOperators ops = assemble_operators(p, m, g);
  for (auto& fk : f)
    for (std::size_t n = 0; n < fk.size(); ++n)
      if (ops.dirichlet[n]) fk[n] = 0.0;
  const McsStepper st(ops, kDefaultTheta, g.dtau);
  const DirichletValue zero = [](std::size_t, std::size_t, double) { return 0.0; };
  std::vector<Field> dv{Field(g)};
  for (std::size_t k = 0; k < g.n_tau; ++k) {
    Field s(g);
    for (std::size_t n = 0; n < s.size(); ++n) s[n] = 0.5 * (f[k][n] + f[k + 1][n]);
    dv.push_back(st.step(dv.back(), g.tau(k), zero, &s));
  }
  const double lhs = space_time_inner(g, res.fields, dv);
  const Trajectory phi = solve_adjoint(p, m, g, res, scheme);
  return std::abs(space_time_inner(g, phi.fields, f) - lhs) / std::abs(lhs);
}

}  // namespace

TEST_CASE("discrete duality on a small grid") {
  const MarketSpec m;
  CHECK(duality_gap(build_grid(m, 8, 8, 4), AdjointScheme::kConservative) < 0.05);
  CHECK(duality_gap(build_grid(m, 16, 16, 16), AdjointScheme::kConservative) < 0.005);
  // the non-divergence form is only dual in the limit
  const double coarse = duality_gap(build_grid(m, 8, 8, 8), AdjointScheme::kExpanded);
  const double fine = duality_gap(build_grid(m, 32, 32, 32), AdjointScheme::kExpanded);
  CHECK(fine < coarse);
}

TEST_CASE("adjoint rejects mismatched inputs") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 8, 8, 4);
  const Grid h = build_grid(m, 8, 8, 5);
  CHECK_THROWS_AS(solve_adjoint(p, m, g, smooth_residual(h)), GridMismatch);
  ResidualTrajectory short_res{g, std::vector<Field>(3, Field(g))};
  CHECK_THROWS_AS(solve_adjoint(p, m, g, short_res), GridMismatch);

  const Trajectory a{g, std::vector<Field>(5, Field(g))};
  const Trajectory b{h, std::vector<Field>(6, Field(h))};
  CHECK_THROWS_AS(residual(a, b), GridMismatch);
}
