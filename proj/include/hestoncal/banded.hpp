#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace hestoncal {

/// LU factorization of a pentadiagonal matrix without pivoting (Thomas-type
/// elimination with two off-diagonals on each side). The ADI stage matrices
/// I - theta dt F are diagonally dominant for the stencils used here, so no
/// pivoting is needed; a vanishing pivot is reported as SolverError.
class BandedLu {
 public:
  static constexpr int kHalfBand = 2;
  using Row = std::array<double, 2 * kHalfBand + 1>;

  BandedLu() = default;
  /// rows[p][o + 2] is the entry at column p + o.
  explicit BandedLu(std::vector<Row> rows);

  [[nodiscard]] std::size_t size() const { return lu_.size(); }

  /// Solves in place on a strided view: x[k * stride] for k < size().
  void solve(double* x, std::size_t stride) const;
  void solve(std::span<double> x) const { solve(x.data(), 1); }

 private:
  std::vector<Row> lu_;
};

}  // namespace hestoncal
