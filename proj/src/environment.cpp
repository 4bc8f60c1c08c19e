#include "qprl/env/environment.hpp"

#include <cmath>
#include <stdexcept>

namespace qprl::env {

void CostSchedule::validate() const {
  if (rate < 0.0) throw std::invalid_argument("cost schedule: negative cost rate");
  if (balance_interest < 1.0) {
    throw std::invalid_argument("cost schedule: balance interest must be >= 1");
  }
}

void check_simplex(const Eigen::VectorXd& weights, double tol) {
  if ((weights.array() < -tol).any()) {
    throw std::invalid_argument("action: negative portfolio weight");
  }
  if (std::abs(weights.sum() - 1.0) > tol) {
    throw std::invalid_argument("action: weights do not sum to one");
  }
}

}  // namespace qprl::env
