#include "doctest.h"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <random>

#include "hestoncal/banded.hpp"
#include "hestoncal/forward_solver.hpp"
#include "stage_oracle.hpp"

using namespace hestoncal;

TEST_CASE("banded LU matches a dense solve") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 23;
  std::vector<BandedLu::Row> rows(n);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t p = 0; p < n; ++p)
    for (int o = -2; o <= 2; ++o) {
      const auto col = static_cast<long>(p) + o;
      if (col < 0 || col >= static_cast<long>(n)) continue;
      const double v = o == 0 ? 6.0 + u(rng) : u(rng);
      rows[p][o + 2] = v;
      dense(static_cast<long>(p), col) = v;
    }
  Eigen::VectorXd b(n);
  for (std::size_t p = 0; p < n; ++p) b(static_cast<long>(p)) = u(rng);
  const Eigen::VectorXd want = dense.partialPivLu().solve(b);

  const BandedLu lu(rows);
  std::vector<double> x(b.data(), b.data() + n);
  lu.solve(x);
  for (std::size_t p = 0; p < n; ++p) CHECK(x[p] == doctest::Approx(want(static_cast<long>(p))).epsilon(1e-13));

  // strided view
  std::vector<double> strided(3 * n, -7.0);
  for (std::size_t p = 0; p < n; ++p) strided[3 * p] = b(static_cast<long>(p));
  lu.solve(strided.data(), 3);
  for (std::size_t p = 0; p < n; ++p) {
    CHECK(strided[3 * p] == doctest::Approx(want(static_cast<long>(p))).epsilon(1e-13));
    CHECK(strided[3 * p + 1] == -7.0);
  }
}

TEST_CASE("banded LU reports a vanishing pivot") {
  std::vector<BandedLu::Row> rows(4, BandedLu::Row{0, 0, 1, 0, 0});
  rows[2][2] = 0.0;
  CHECK_THROWS_AS(BandedLu{rows}, SolverError);
}

TEST_CASE("initial_condition examples") {
  MarketSpec m;
  TruncationConfig t;
  t.x_min = std::log(m.strike) - 4.0;
  t.x_max = std::log(m.strike) + 4.0;
  const Grid g = build_grid(m, 8, 4, 4, t);
  const Field f = initial_condition(g, m);
  for (std::size_t j = 0; j <= g.n_nu; ++j) {
    CHECK(f(4, j) == doctest::Approx(0.0).scale(1e-12));
    CHECK(f(3, j) == doctest::Approx(6.3212).epsilon(1e-4));
    CHECK(f(3, j) == doctest::Approx(10.0 - 10.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(f(5, j) == 0.0);
  }
}

TEST_CASE("mcs_step degenerate cases") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 20, 16, 8);
  const SplitOperators ops = assemble_operators(p, m, g);
  const DirichletValue zero = [](std::size_t, std::size_t, double) { return 0.0; };

  SUBCASE("zero field stays zero") {
    const Field out = mcs_step(Field(g), 0, ops, kDefaultTheta, g.dtau, zero);
    for (double v : out.values()) CHECK(v == 0.0);
  }
  SUBCASE("zero step returns the input") {
    Field v = initial_condition(g, m);
    const auto bc = put_boundary(m);
    for (std::size_t j = 0; j <= g.n_nu; ++j) {
      v(0, j) = bc(0, j, 0.0);
      v(g.n_x, j) = 0.0;
    }
    for (double th : {0.3, kDefaultTheta, 1.0}) {
      const Field out = mcs_step(v, 0, ops, th, 0.0, bc);
      CHECK(out == v);
    }
  }
  SUBCASE("linear in the data with homogeneous boundaries") {
    const McsStepper st(ops, kDefaultTheta, g.dtau);
    const Field v = initial_condition(g, m);
    Field v3 = v;
    for (double& x : v3.values()) x *= 3.0;
    const Field a = st.step(v, 0.0, zero);
    const Field b = st.step(v3, 0.0, zero);
    for (std::size_t n = 0; n < a.size(); ++n) CHECK(b[n] == doctest::Approx(3.0 * a[n]).epsilon(1e-12).scale(1e-12));
  }
  SUBCASE("bad theta") {
    CHECK_THROWS_AS(McsStepper(ops, 0.0, g.dtau), std::invalid_argument);
    CHECK_THROWS_AS(McsStepper(ops, 1.5, g.dtau), std::invalid_argument);
    CHECK_THROWS_AS(McsStepper(ops, 0.5, -1.0), std::invalid_argument);
  }
}

TEST_CASE("one step from the payoff matches a sparse-matrix evaluation of the stages") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 80, 80, 40);
  const SplitOperators ops = assemble_operators(p, m, g);
  const auto bc = put_boundary(m);
  const Field v = initial_condition(g, m);

  const Field got = mcs_step(v, 0, ops, kDefaultTheta, g.dtau, bc);
  const Field want = testing::stage_oracle(ops, v, 0.0, g.dtau, kDefaultTheta, bc, nullptr);
  double worst = 0.0;
  for (std::size_t n = 0; n < got.size(); ++n) worst = std::max(worst, std::abs(got[n] - want[n]));
  CHECK(worst < 1e-11);
}

TEST_CASE("solve_forward trajectory") {
  const MarketSpec m;
  const HestonParams p;
  const Grid g = build_grid(m, 80, 80, 40);
  const Trajectory t = solve_forward(p, m, g);
  REQUIRE(t.fields.size() == 41);
  CHECK(t.steps() == 40);
  CHECK(t[0] == initial_condition(g, m));

  bool boundaries = true, bounded = true, monotone = true;
  for (std::size_t k = 1; k <= g.n_tau; ++k)
    for (std::size_t j = 0; j <= g.n_nu; ++j) {
      boundaries &= t[k](0, j) == m.strike * std::exp(-m.rate * g.tau(k));
      boundaries &= t[k](g.n_x, j) == 0.0;
    }
  // The second-order one-sided nu stencil on the nu = 0 row is not monotone
  // and undershoots by about 3e-6 K next to the kink in the first steps.
  const double tol = 1e-5 * m.strike;
  for (std::size_t k = 0; k <= g.n_tau; ++k)
    for (std::size_t i = 0; i <= g.n_x; ++i)
      for (std::size_t j = 0; j <= g.n_nu; ++j) {
        const double v = t[k](i, j);
        bounded &= v >= -tol && v <= m.strike;
        if (i > 0) monotone &= v <= t[k](i - 1, j) + tol;
      }
  CHECK(boundaries);
  CHECK(bounded);
  CHECK(monotone);

  // semi-analytic reference (independent high-resolution quadrature)
  const double price = interpolate_price(t, 10.0, 0.16, 40);
  CHECK(std::abs(price / 1.2277179623131387 - 1.0) < 0.01);
}

TEST_CASE("temporal self-convergence") {
  const MarketSpec m;
  const HestonParams p;
  std::vector<double> prices;
  for (std::size_t nt : {20u, 40u, 80u}) {
    const Grid g = build_grid(m, 40, 40, nt);
    prices.push_back(interpolate_price(solve_forward(p, m, g), 10.0, 0.16, nt));
  }
  const double order = std::log2(std::abs(prices[0] - prices[1]) / std::abs(prices[1] - prices[2]));
  CHECK(order >= 1.5);
}

TEST_CASE("interpolation") {
  const MarketSpec m;
  const Grid g = build_grid(m, 10, 8, 4);
  Field f(g);
  for (std::size_t i = 0; i <= g.n_x; ++i)
    for (std::size_t j = 0; j <= g.n_nu; ++j) f(i, j) = 1.0 + 2.0 * g.x(i) - 3.0 * g.nu(j) + 0.5 * g.x(i) * g.nu(j);

  CHECK(interpolate(f, g, g.x(3), g.nu(5)) == doctest::Approx(f(3, 5)).epsilon(1e-14));
  CHECK(interpolate(f, g, g.x_max, g.nu_max) == doctest::Approx(f(10, 8)).epsilon(1e-14));
  const double xc = 0.5 * (g.x(3) + g.x(4)), nc = 0.5 * (g.nu(5) + g.nu(6));
  const double mean = 0.25 * (f(3, 5) + f(4, 5) + f(3, 6) + f(4, 6));
  CHECK(interpolate(f, g, xc, nc) == doctest::Approx(mean).epsilon(1e-14));

  CHECK_THROWS_AS(interpolate(f, g, g.x_min - 0.01, 0.1), std::out_of_range);
  CHECK_THROWS_AS(interpolate(f, g, g.x_max + 0.01, 0.1), std::out_of_range);
  CHECK_THROWS_AS(interpolate(f, g, 2.0, -0.1), std::out_of_range);
  CHECK_THROWS_AS(interpolate(f, g, 2.0, g.nu_max + 0.1), std::out_of_range);

  const Trajectory t{g, {f}};
  CHECK(interpolate_price(t, std::exp(g.x(3)), g.nu(5), 0) == doctest::Approx(f(3, 5)));
  CHECK_THROWS_AS(interpolate_price(t, 10.0, 0.1, 1), std::out_of_range);
  CHECK_THROWS_AS(interpolate_price(t, 1e-6, 0.1, 0), std::out_of_range);
}
