#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "qprl/dp/tabular_mdp.hpp"
#include "qprl/math/mlp.hpp"

namespace qprl::rl {

/// One on-policy transition. `raw` keeps the pre-softmax Gaussian draw
/// the actor needs to rebuild its score; Dirichlet heads use the action
/// weights directly.
struct Transition {
  Eigen::VectorXd features;
  Eigen::VectorXd next_features;
  Eigen::VectorXd action;
  Eigen::VectorXd raw;
  double log_prob = 0.0;
  double reward = 0.0;
  double weight = 1.0;  // sample weight q (regime enumeration)
  bool terminal = false;
  /// Positive-homogeneity factors: the critic head values are per-unit
  /// quantities multiplied by these scales (wealth, typically 1).
  double value_scale = 1.0;
  double next_value_scale = 1.0;
};

/// Multi-head quantile critic: an online network with one output per
/// quantile level and a slowly updated target copy.
struct CriticParams {
  math::MlpParams online;
  math::MlpParams target;
  dp::QuantileGrid grid;
  double order_penalty = 5.0;     // lambda_omega
  double soft_update_rate = 0.01; // rho
  double td_scale = 1.0;

  void validate() const;

  static CriticParams make(int input_dim, const std::vector<int>& hidden,
                           const dp::QuantileGrid& grid, double order_penalty,
                           double soft_update_rate, double weight_decay,
                           math::Rng& rng);
};

/// Online-network quantile values for a state: one entry per level.
Eigen::VectorXd value_vector(const math::MlpParams& net,
                             const Eigen::VectorXd& features);

/// Scaled per-quantile TD errors: the bootstrap term comes from the
/// target network and is dropped on terminal transitions.
Eigen::VectorXd td_errors(const Transition& transition, const CriticParams& params,
                          double discount);

struct CriticLossResult {
  double loss = 0.0;
  math::MlpGrads grads;
  /// target-tau TD error per sample, reused by the actor update
  std::vector<double> target_td;
};

/// Self-normalized q-weighted batch loss: per-sample pinball terms over
/// all heads plus the rectified order penalty on the online heads.
/// Gradients flow through the online network only. Per-sample work is
/// OpenMP-parallel with slot-indexed buffers, so results are bitwise
/// deterministic for any thread count; `critic_loss_serial` is the
/// reference implementation.
CriticLossResult critic_loss(std::span<const Transition> batch,
                             const CriticParams& params, double discount);
CriticLossResult critic_loss_serial(std::span<const Transition> batch,
                                    const CriticParams& params, double discount);

/// target <- rho * online + (1 - rho) * target
void soft_update(CriticParams& params);

}  // namespace qprl::rl
