#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hestoncal {

/// Raised when a linear stage solve or a time march produces unusable values.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when two objects that must share a mesh were built on different ones.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Contract data fixed by the market. Only European puts are priced.
struct MarketSpec {
  double strike = 10.0;
  double rate = 0.1;
  double dividend = 0.05;
  double maturity = 1.0;

  void validate() const;
};

/// Parameter vector in calibration order (sigma, rho, kappa, mu).
using ParamVector = std::array<double, 4>;

enum ParamIndex : std::size_t { kSigma = 0, kRho = 1, kKappa = 2, kMu = 3 };

inline constexpr std::array<const char*, 4> kParamNames = {"sigma", "rho", "kappa", "mu"};

/// The calibrated Heston parameters.
struct HestonParams {
  double sigma = 0.9;  // vol-of-variance
  double rho = 0.1;    // correlation
  double kappa = 5.0;  // mean-reversion rate
  double mu = 0.16;    // long-run variance

  [[nodiscard]] ParamVector to_vector() const { return {sigma, rho, kappa, mu}; }
  static HestonParams from_vector(const ParamVector& v) { return {v[0], v[1], v[2], v[3]}; }

  [[nodiscard]] bool feller() const { return 2.0 * kappa * mu >= sigma * sigma; }

  /// Throws std::invalid_argument unless the parameters define a usable PDE:
  /// finite, sigma > 0, |rho| <= 1, kappa > 0, mu > 0.
  void validate() const;

  friend bool operator==(const HestonParams&, const HestonParams&) = default;
};

inline double dot(const ParamVector& a, const ParamVector& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline double norm(const ParamVector& a) { return std::sqrt(dot(a, a)); }

}  // namespace hestoncal
