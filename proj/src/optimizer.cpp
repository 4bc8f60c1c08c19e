#include "qprl/math/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qprl::math {

double learning_rate(const OptimizerState& opt) {
  if (opt.total_steps < 1) throw std::invalid_argument("optimizer: total_steps < 1");
  const double t = static_cast<double>(std::min(opt.step, opt.total_steps));
  const double frac = 1.0 - t / static_cast<double>(opt.total_steps);
  return opt.lr_end + (opt.lr_start - opt.lr_end) * std::pow(frac, opt.power);
}

void apply_sgd(MlpParams& params, const MlpGrads& grads, OptimizerState& opt) {
  const double lr = learning_rate(opt);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    params.weights[l] -= lr * grads.weights[l];
    params.biases[l] -= lr * grads.biases[l];
  }
  ++opt.step;
}

}  // namespace qprl::math
