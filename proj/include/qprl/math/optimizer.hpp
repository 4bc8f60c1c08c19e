#pragma once

#include "qprl/math/mlp.hpp"

namespace qprl::math {

/// Plain gradient descent with a polynomial learning-rate decay
/// lr(t) = lr_end + (lr_start - lr_end) * (1 - t/total)^power,
/// clamped at lr_end once t reaches total_steps.
struct OptimizerState {
  double lr_start = 0.01;
  double lr_end = 0.001;
  double power = 1.5;
  long long total_steps = 1;
  long long step = 0;
};

double learning_rate(const OptimizerState& opt);

/// w <- w - lr(t) * g, then advances the step counter.
void apply_sgd(MlpParams& params, const MlpGrads& grads, OptimizerState& opt);

}  // namespace qprl::math
