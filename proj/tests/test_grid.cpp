#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hestoncal/grid.hpp"

using namespace hestoncal;

namespace {

Grid wide_grid(std::size_t nx = 80, std::size_t nnu = 80, std::size_t ntau = 40) {
  const MarketSpec m;
  TruncationConfig t;
  t.x_min = std::log(m.strike) - 5.0;
  t.x_max = std::log(m.strike) + 5.0;
  return build_grid(m, nx, nnu, ntau, t);
}

template <class F>
Field sample(const Grid& g, F f) {
  Field out(g);
  for (std::size_t i = 0; i <= g.n_x; ++i)
    for (std::size_t j = 0; j <= g.n_nu; ++j) out(i, j) = f(g.x(i), g.nu(j));
  return out;
}

}  // namespace

TEST_CASE("build_grid spacings") {
  const Grid g = wide_grid();
  CHECK(g.dx == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(g.dnu == doctest::Approx(0.0375).epsilon(1e-14));
  CHECK(g.dtau == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(g.x(80) == doctest::Approx(std::log(10.0) + 5.0));
  CHECK(g.nu(80) == doctest::Approx(3.0));

  const Grid h = wide_grid(100, 80, 40);
  CHECK(h.dx == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("build_grid rejects bad input") {
  const MarketSpec m;
  CHECK_THROWS_AS(build_grid(m, 1, 80, 40), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(m, 80, 3, 40), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(m, 80, 80, 0), std::invalid_argument);
  TruncationConfig t;
  t.x_min = std::log(m.strike) + 0.1;
  CHECK_THROWS_AS(build_grid(m, 80, 80, 40, t), std::invalid_argument);
  TruncationConfig u;
  u.nu_max = 0.0;
  CHECK_THROWS_AS(build_grid(m, 80, 80, 40, u), std::invalid_argument);
  MarketSpec bad;
  bad.maturity = 0.0;
  CHECK_THROWS_AS(build_grid(bad, 80, 80, 40), std::invalid_argument);
}

TEST_CASE("default truncation keeps the strike inside") {
  const MarketSpec m;
  const Grid g = build_grid(m, 80, 80, 40);
  CHECK(g.x_min < std::log(m.strike));
  CHECK(std::log(m.strike) < g.x_max);
  CHECK_NOTHROW(require_same_grid(g, g, "same"));
  CHECK_THROWS_AS(require_same_grid(g, build_grid(m, 80, 40, 40), "other"), GridMismatch);
}

TEST_CASE("quadrature weights integrate constants exactly") {
  const Grid g = wide_grid(20, 10, 8);
  const Field w = trapezoid_weights(g);
  const double area = std::accumulate(w.values().begin(), w.values().end(), 0.0);
  CHECK(area == doctest::Approx((g.x_max - g.x_min) * g.nu_max).epsilon(1e-13));
  const auto wt = time_weights(g);
  CHECK(wt.size() == 9);
  CHECK(std::accumulate(wt.begin(), wt.end(), 0.0) == doctest::Approx(g.maturity).epsilon(1e-14));
}

TEST_CASE("upwind_first_nu examples") {
  const auto f = upwind_first_nu(2.0, 0.1);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == doctest::Approx(-20.0));
  CHECK(f[2] == doctest::Approx(20.0));
  const auto b = upwind_first_nu(-2.0, 0.1);
  CHECK(b[0] == doctest::Approx(20.0));
  CHECK(b[1] == doctest::Approx(-20.0));
  CHECK(b[2] == 0.0);
  const auto z = upwind_first_nu(0.0, 0.1);
  CHECK(z == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("upwind stencil never anti-diffuses") {
  for (double a = -3.0; a <= 3.0; a += 0.25) {
    const auto w = upwind_first_nu(a, 0.05);
    if (a > 0) CHECK(w[0] == 0.0);
    if (a < 0) CHECK(w[2] == 0.0);
    // exact on linear functions
    CHECK(w[0] * -1.0 + w[2] * 1.0 == doctest::Approx(a / 0.05));
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(0.0));
  }
}

TEST_CASE("operator response on polynomials") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = wide_grid(40, 30, 10);
  const SplitOperators ops = assemble_operators(p, m, g);
  const double r = m.rate, q = m.dividend;

  SUBCASE("constant") {
    const Field out = ops.apply(Field(g, 2.5));
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 0; j <= g.n_nu; ++j) CHECK(out(i, j) == doctest::Approx(-r * 2.5).epsilon(1e-10));
  }
  SUBCASE("linear in x") {
    const Field out = ops.apply(sample(g, [](double x, double) { return x; }));
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 0; j <= g.n_nu; ++j) {
        const double nu = g.nu(j);
        CHECK(out(i, j) == doctest::Approx((r - q - 0.5 * nu) - r * g.x(i)).epsilon(1e-10));
      }
  }
  SUBCASE("quadratic in x") {
    const Field out = ops.apply(sample(g, [](double x, double) { return x * x; }));
    for (std::size_t i = 1; i < g.n_x; ++i)
      for (std::size_t j = 0; j <= g.n_nu; ++j) {
        const double nu = g.nu(j), x = g.x(i);
        const double want = nu + (r - q - 0.5 * nu) * 2.0 * x - r * x * x;
        CHECK(out(i, j) == doctest::Approx(want).epsilon(1e-9).scale(1.0));
      }
  }
  SUBCASE("Dirichlet rows are empty") {
    const Field out = ops.apply(sample(g, [](double x, double nu) { return x * x + nu; }));
    for (std::size_t j = 0; j <= g.n_nu; ++j) {
      CHECK(out(0, j) == 0.0);
      CHECK(out(g.n_x, j) == 0.0);
      CHECK(ops.dirichlet[g.index(0, j)] == 1);
      CHECK(ops.dirichlet[g.index(g.n_x, j)] == 1);
    }
  }
}

TEST_CASE("second differences are exact on quadratics for any spacing") {
  const MarketSpec m;
  HestonParams p;
  p.rho = 0.0;
  for (std::size_t n : {8u, 13u, 40u}) {
    const Grid g = build_grid(m, n, n + 3, 4);
    const SplitOperators ops = assemble_operators(p, m, g);
    // upwinding is only first order, so the nu direction is checked on a linear field
    const Field fx = ops.fx.apply(sample(g, [](double x, double) { return x * x; }));
    for (std::size_t i = 1; i < g.n_x; ++i) {
      const std::size_t j = g.n_nu / 2;
      const double nu = g.nu(j), x = g.x(i);
      CHECK(fx(i, j) == doctest::Approx(nu + (m.rate - m.dividend - 0.5 * nu) * 2 * x - m.rate * x * x).epsilon(1e-10));
    }
    const Field fn = ops.fnu.apply(sample(g, [](double, double nu) { return nu; }));
    for (std::size_t j = 0; j < g.n_nu; ++j)
      CHECK(fn(3, j) == doctest::Approx(p.kappa * (p.mu - g.nu(j))).epsilon(1e-10).scale(1.0));
    CHECK(fn(3, g.n_nu) == 0.0);
  }
}

TEST_CASE("mixed stencil on x*nu gives sigma rho nu") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = wide_grid(17, 11, 4);
  const SplitOperators ops = assemble_operators(p, m, g);
  const Field out = ops.f0.apply(sample(g, [](double x, double nu) { return x * nu; }));
  for (std::size_t i = 1; i < g.n_x; ++i) {
    for (std::size_t j = 1; j < g.n_nu; ++j)
      CHECK(out(i, j) == doctest::Approx(p.sigma * p.rho * g.nu(j)).epsilon(1e-11));
    CHECK(out(i, 0) == 0.0);
    CHECK(out(i, g.n_nu) == 0.0);
  }
}

TEST_CASE("operator locality") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 12, 10, 4);
  const SplitOperators ops = assemble_operators(p, m, g);
  for (std::size_t i = 0; i <= g.n_x; ++i)
    for (std::size_t j = 0; j <= g.n_nu; ++j) {
      const auto& rx = ops.fx.row(i, j);
      CHECK(rx[0] == 0.0);
      CHECK(rx[4] == 0.0);
      const auto& rn = ops.fnu.row(i, j);
      CHECK(rn[0] == 0.0);
      if (j != 0) CHECK(rn[4] == 0.0);  // the nu = 0 closure is a one-sided 3-point stencil
    }
  CHECK(ops.fx.direction() == Direction::kX);
  CHECK(ops.fnu.direction() == Direction::kNu);

  // F0 touches only the four diagonal neighbours
  Field impulse(g);
  impulse(6, 5) = 1.0;
  const Field out = ops.f0.apply(impulse);
  for (std::size_t i = 0; i <= g.n_x; ++i)
    for (std::size_t j = 0; j <= g.n_nu; ++j) {
      const bool diag = (i == 5 || i == 7) && (j == 4 || j == 6);
      if (!diag) CHECK(out(i, j) == 0.0);
      else CHECK(out(i, j) != 0.0);
    }
}

TEST_CASE("nu rows are upwinded against the drift") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 10, 40, 4);
  const SplitOperators ops = assemble_operators(p, m, g);
  for (std::size_t j = 1; j < g.n_nu; ++j) {
    const double nu = g.nu(j);
    const double diff = 0.5 * p.sigma * p.sigma * nu / (g.dnu * g.dnu);
    const double a = p.kappa * (p.mu - nu);
    const auto& r = ops.fnu.row(4, j);
    CHECK(r[1] - diff == doctest::Approx(std::max(-a, 0.0) / g.dnu).scale(1.0));
    CHECK(r[3] - diff == doctest::Approx(std::max(a, 0.0) / g.dnu).scale(1.0));
    CHECK(r[1] >= 0.0);
    CHECK(r[3] >= 0.0);
  }
}

TEST_CASE("nu = 0 row ignores sigma and rho") {
  const MarketSpec m;
  const Grid g = build_grid(m, 10, 8, 4);
  const HestonParams a{0.3, -0.7, 2.0, 0.2};
  const HestonParams b{1.1, 0.6, 2.0, 0.2};
  const SplitOperators oa = assemble_operators(a, m, g);
  const SplitOperators ob = assemble_operators(b, m, g);
  for (std::size_t i = 0; i <= g.n_x; ++i) {
    CHECK(oa.fx.row(i, 0) == ob.fx.row(i, 0));
    CHECK(oa.fnu.row(i, 0) == ob.fnu.row(i, 0));
    CHECK(oa.f0.row(i, 0) == ob.f0.row(i, 0));
  }
  // kappa mu (-3, 4, -1) / (2 dnu)
  const auto& r = oa.fnu.row(3, 0);
  const double km = a.kappa * a.mu / (2 * g.dnu);
  CHECK(r[2] == doctest::Approx(-3 * km));
  CHECK(r[3] == doctest::Approx(4 * km));
  CHECK(r[4] == doctest::Approx(-km));
}

TEST_CASE("assemble_operators rejects invalid parameters") {
  const MarketSpec m;
  const Grid g = build_grid(m, 10, 8, 4);
  CHECK_THROWS_AS(assemble_operators({0.0, 0.1, 5, 0.16}, m, g), std::invalid_argument);
  CHECK_THROWS_AS(assemble_operators({0.9, 1.5, 5, 0.16}, m, g), std::invalid_argument);
  CHECK_THROWS_AS(assemble_operators({0.9, 0.1, -1, 0.16}, m, g), std::invalid_argument);
  CHECK_THROWS_AS(assemble_operators({0.9, 0.1, 5, std::nan("")}, m, g), std::invalid_argument);
}
