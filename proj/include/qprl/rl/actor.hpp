#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "qprl/env/environment.hpp"
#include "qprl/math/mlp.hpp"
#include "qprl/rl/critic.hpp"

namespace qprl::rl {

enum class PolicyHead { GaussianSoftmax, Dirichlet };

/// Stochastic policy over the portfolio simplex. The network emits
/// Gaussian means (softmax-transformed after sampling) or Dirichlet
/// concentration pre-activations (softplus plus a small positive bias).
struct ActorParams {
  math::MlpParams net;
  PolicyHead head = PolicyHead::GaussianSoftmax;
  double sigma = 0.5;            // Gaussian exploration scale
  double entropy_coef = 0.0;     // lambda_theta
  double concentration_bias = 0.05;

  void validate() const;

  static ActorParams make(int input_dim, const std::vector<int>& hidden,
                          int num_assets, PolicyHead head, double sigma,
                          double weight_decay, math::Rng& rng);
};

struct ActionSample {
  env::PortfolioAction action;
  Eigen::VectorXd raw;  // Gaussian draw before softmax (Gaussian head only)
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Samples an action for a state. Throws on non-finite head outputs.
ActionSample act(const ActorParams& params, const Eigen::VectorXd& features,
                 math::Rng& rng);

/// Deterministic evaluation action: softmax of the Gaussian means, or
/// the normalized Dirichlet concentrations.
env::PortfolioAction mean_action(const ActorParams& params,
                                 const Eigen::VectorXd& features);

struct ActorLossResult {
  double loss = 0.0;
  math::MlpGrads grads;
};

/// Quantile-weighted policy-gradient surrogate over a batch. The TD
/// error at the target level enters as a constant; by default the
/// gradient implements ascent (a positive error reinforces the sampled
/// action under a descent step); `literal_paper_sign` flips it to the
/// displayed-loss form for comparison. q-weighted and self-normalized.
/// OpenMP-parallel with slot-indexed buffers; the serial twin is the
/// reference.
ActorLossResult actor_loss(std::span<const Transition> batch,
                           std::span<const double> target_td,
                           const ActorParams& params, double tau,
                           bool literal_paper_sign = false);
ActorLossResult actor_loss_serial(std::span<const Transition> batch,
                                  std::span<const double> target_td,
                                  const ActorParams& params, double tau,
                                  bool literal_paper_sign = false);

}  // namespace qprl::rl
