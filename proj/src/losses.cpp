#include "qprl/math/losses.hpp"

#include <stdexcept>

namespace qprl::math {

namespace {
void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("pinball: tau must lie in (0, 1)");
  }
}
}  // namespace

double pinball_loss(double delta, double tau) {
  check_tau(tau);
  return delta >= 0.0 ? tau * delta : (tau - 1.0) * delta;
}

double pinball_slope(double delta, double tau) {
  check_tau(tau);
  return delta >= 0.0 ? tau : tau - 1.0;
}

double quantile_weight(double z, double tau) {
  check_tau(tau);
  return z >= 0.0 ? tau : tau - 1.0;
}

}  // namespace qprl::math
