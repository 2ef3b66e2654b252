#include "hestoncal/types.hpp"

#include <string>

namespace hestoncal {

void MarketSpec::validate() const {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw std::invalid_argument("strike must be positive, got " + std::to_string(strike));
  }
  if (!(maturity > 0.0) || !std::isfinite(maturity)) {
    throw std::invalid_argument("maturity must be positive, got " + std::to_string(maturity));
  }
  if (!std::isfinite(rate) || !std::isfinite(dividend)) {
    throw std::invalid_argument("rate and dividend must be finite");
  }
}

void HestonParams::validate() const {
  for (double v : to_vector()) {
    if (!std::isfinite(v)) throw std::invalid_argument("Heston parameters must be finite");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (rho < -1.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [-1, 1]");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
}

}  // namespace hestoncal
