#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hestoncal/types.hpp"

namespace hestoncal {

/// Truncation of the unbounded (x, nu) domain. Unset x bounds default to
/// ln K -/+ kDefaultLogHalfWidth.
struct TruncationConfig {
  static constexpr double kDefaultLogHalfWidth = 3.0;
  static constexpr double kDefaultNuMax = 3.0;

  std::optional<double> x_min;
  std::optional<double> x_max;
  double nu_max = kDefaultNuMax;
};

/// Uniform tensor mesh in log-price x, variance nu and time-to-maturity tau.
struct Grid {
  double x_min = 0.0;
  double x_max = 0.0;
  double nu_max = 0.0;
  double maturity = 0.0;
  std::size_t n_x = 0;
  std::size_t n_nu = 0;
  std::size_t n_tau = 0;
  double dx = 0.0;
  double dnu = 0.0;
  double dtau = 0.0;

  [[nodiscard]] double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }
  [[nodiscard]] double nu(std::size_t j) const { return static_cast<double>(j) * dnu; }
  [[nodiscard]] double tau(std::size_t k) const { return static_cast<double>(k) * dtau; }

  [[nodiscard]] std::size_t x_nodes() const { return n_x + 1; }
  [[nodiscard]] std::size_t nu_nodes() const { return n_nu + 1; }
  [[nodiscard]] std::size_t size() const { return x_nodes() * nu_nodes(); }
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const { return i * nu_nodes() + j; }

  [[nodiscard]] bool is_x_boundary(std::size_t i) const { return i == 0 || i == n_x; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid build_grid(const MarketSpec& market, std::size_t n_x, std::size_t n_nu, std::size_t n_tau,
                const TruncationConfig& truncation = {});

/// Throws GridMismatch unless a and b are the same mesh.
void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// Nodal values on the (x, nu) plane; (i, j) <-> (x_i, nu_j).
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0)
      : x_nodes_(grid.x_nodes()), nu_nodes_(grid.nu_nodes()), values_(grid.size(), value) {}
  Field(std::size_t x_nodes, std::size_t nu_nodes, double value = 0.0)
      : x_nodes_(x_nodes), nu_nodes_(nu_nodes), values_(x_nodes * nu_nodes, value) {}

  double& operator()(std::size_t i, std::size_t j) { return values_[i * nu_nodes_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * nu_nodes_ + j]; }
  double& operator[](std::size_t n) { return values_[n]; }
  double operator[](std::size_t n) const { return values_[n]; }

  [[nodiscard]] std::size_t x_nodes() const { return x_nodes_; }
  [[nodiscard]] std::size_t nu_nodes() const { return nu_nodes_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  [[nodiscard]] bool all_finite() const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t x_nodes_ = 0;
  std::size_t nu_nodes_ = 0;
  std::vector<double> values_;
};

/// Trapezoidal quadrature weights on the (x, nu) plane, indexed like a Field.
Field trapezoid_weights(const Grid& grid);

/// Trapezoidal weights on the tau axis (n_tau + 1 entries).
std::vector<double> time_weights(const Grid& grid);

/// First-order upwind weights (w_{j-1}, w_j, w_{j+1}) for a * d/dnu.
/// Forward difference for a > 0, backward for a < 0, zero for a == 0.
std::array<double, 3> upwind_first_nu(double a, double dnu);

enum class Direction : std::uint8_t { kX, kNu };

/// An operator coupling each node only to neighbours along one grid direction.
/// Each row stores five weights for offsets -2..+2; rows are at most
/// pentadiagonal along their line so the stage systems stay banded.
class DirectionalOperator {
 public:
  static constexpr int kHalfBand = 2;
  using Row = std::array<double, 2 * kHalfBand + 1>;

  DirectionalOperator() = default;
  DirectionalOperator(const Grid& grid, Direction direction)
      : direction_(direction), x_nodes_(grid.x_nodes()), nu_nodes_(grid.nu_nodes()),
        rows_(grid.size(), Row{}) {}

  [[nodiscard]] Direction direction() const { return direction_; }

  /// Row of node n; entry offset + kHalfBand weights the neighbour `offset`
  /// steps away along the direction.
  Row& row(std::size_t n) { return rows_[n]; }
  [[nodiscard]] const Row& row(std::size_t n) const { return rows_[n]; }
  Row& row(std::size_t i, std::size_t j) { return rows_[i * nu_nodes_ + j]; }
  [[nodiscard]] const Row& row(std::size_t i, std::size_t j) const { return rows_[i * nu_nodes_ + j]; }

  /// Distance in flat storage between neighbours along this direction.
  [[nodiscard]] std::size_t stride() const { return direction_ == Direction::kX ? nu_nodes_ : 1; }
  [[nodiscard]] std::size_t line_length() const { return direction_ == Direction::kX ? x_nodes_ : nu_nodes_; }
  [[nodiscard]] std::size_t line_count() const { return direction_ == Direction::kX ? nu_nodes_ : x_nodes_; }
  /// Flat index of the first node of line `line`.
  [[nodiscard]] std::size_t line_start(std::size_t line) const {
    return direction_ == Direction::kX ? line : line * nu_nodes_;
  }

  void apply(const Field& in, Field& out) const;
  [[nodiscard]] Field apply(const Field& in) const;

 private:
  Direction direction_ = Direction::kX;
  std::size_t x_nodes_ = 0;
  std::size_t nu_nodes_ = 0;
  std::vector<Row> rows_;
};

/// Mixed-derivative operator: each node couples to its four diagonal
/// neighbours, stored in the order (i+1,j+1), (i+1,j-1), (i-1,j+1), (i-1,j-1).
class MixedOperator {
 public:
  using Row = std::array<double, 4>;

  MixedOperator() = default;
  explicit MixedOperator(const Grid& grid)
      : x_nodes_(grid.x_nodes()), nu_nodes_(grid.nu_nodes()), rows_(grid.size(), Row{}) {}

  Row& row(std::size_t n) { return rows_[n]; }
  [[nodiscard]] const Row& row(std::size_t n) const { return rows_[n]; }
  Row& row(std::size_t i, std::size_t j) { return rows_[i * nu_nodes_ + j]; }
  [[nodiscard]] const Row& row(std::size_t i, std::size_t j) const { return rows_[i * nu_nodes_ + j]; }

  void apply(const Field& in, Field& out) const;
  [[nodiscard]] Field apply(const Field& in) const;

 private:
  std::size_t x_nodes_ = 0;
  std::size_t nu_nodes_ = 0;
  std::vector<Row> rows_;
};

/// The ADI splitting F = F0 + Fx + Fnu. F0 holds the mixed derivative, Fx the
/// x-derivatives plus the zeroth-order term, Fnu the nu-derivatives. Nodes
/// flagged in `dirichlet` carry zero rows in all three operators and are
/// replaced by identity rows in the implicit stages.
struct SplitOperators {
  Grid grid;
  MixedOperator f0;
  DirectionalOperator fx;
  DirectionalOperator fnu;
  std::vector<std::uint8_t> dirichlet;

  void apply(const Field& in, Field& out) const;
  [[nodiscard]] Field apply(const Field& in) const;
};

/// Assembles the split finite-difference operator of the log-transformed
/// Heston PDE
///
///   V_tau = nu/2 V_xx + sigma^2 nu/2 V_nunu + (r - q - nu/2) V_x
///           + kappa (mu - nu) V_nu + sigma rho nu V_xnu - r V
///
/// with Dirichlet rows at x_min / x_max, the reduced nu = 0 row
/// V_tau = (r-q) V_x + kappa mu V_nu - r V (second-order one-sided nu stencil)
/// and the asymptotic nu_max row without nu-derivatives.
SplitOperators assemble_operators(const HestonParams& params, const MarketSpec& market, const Grid& grid);

}  // namespace hestoncal
