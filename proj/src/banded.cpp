#include "hestoncal/banded.hpp"

#include <cmath>
#include <string>

#include "hestoncal/types.hpp"

namespace hestoncal {

BandedLu::BandedLu(std::vector<Row> rows) : lu_(std::move(rows)) {
  const std::size_t n = lu_.size();
  constexpr std::size_t c = kHalfBand;
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = lu_[k][c];
    if (!std::isfinite(pivot) || std::abs(pivot) < 1e-300) {
      throw SolverError("singular stage matrix: pivot " + std::to_string(pivot) + " at row " + std::to_string(k));
    }
    for (std::size_t i = k + 1; i <= k + c && i < n; ++i) {
      // Column k sits at offset k - i in row i.
      double& lik = lu_[i][c + k - i];
      if (lik == 0.0) continue;
      lik /= pivot;
      for (std::size_t col = k + 1; col <= k + c && col < n; ++col) {
        lu_[i][c + col - i] -= lik * lu_[k][c + col - k];
      }
    }
  }
  for (auto& r : lu_) r[c] = 1.0 / r[c];
}

void BandedLu::solve(double* x, std::size_t stride) const {
  const std::size_t n = lu_.size();
  if (n == 0) return;
  const std::size_t s = stride;
  // Forward substitution with the unit lower factor.
  if (n > 1) x[s] -= lu_[1][1] * x[0];
  for (std::size_t i = 2; i < n; ++i) {
    const auto& r = lu_[i];
    x[i * s] -= r[0] * x[(i - 2) * s] + r[1] * x[(i - 1) * s];
  }
  // Back substitution; the diagonal holds reciprocal pivots.
  x[(n - 1) * s] *= lu_[n - 1][2];
  if (n > 1) x[(n - 2) * s] = (x[(n - 2) * s] - lu_[n - 2][3] * x[(n - 1) * s]) * lu_[n - 2][2];
  for (std::size_t ii = n - 2; ii-- > 0;) {
    const auto& r = lu_[ii];
    x[ii * s] = (x[ii * s] - r[3] * x[(ii + 1) * s] - r[4] * x[(ii + 2) * s]) * r[2];
  }
}

}  // namespace hestoncal
