#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "qprl/env/environment.hpp"

namespace qprl::env {

enum class Scenario { BullBear, NeutralBear, BullNeutral };

Scenario scenario_from_string(const std::string& name);
std::string scenario_name(Scenario scenario);

/// Regime-switching VAR(1) on asset log-returns:
/// r_{t+1} = c_k + Phi r_t + u, u ~ N(0, Sigma_k), with the regime
/// following a first-order Markov chain with row-stochastic Q.
struct RegimeVarModel {
  int num_regimes = 0;
  int num_assets = 0;
  std::vector<Eigen::VectorXd> drift;   // c_k
  Eigen::MatrixXd phi;                  // N x N, shared across regimes
  std::vector<Eigen::MatrixXd> sigma;   // Sigma_k
  Eigen::MatrixXd q;                    // K x K transition matrix
  double risk_free = 1.001;             // gross per-step rate on cash

  void validate() const;

  /// Stationary distribution: minimal-norm least-squares solution of
  /// pi' Q = pi', sum(pi) = 1.
  Eigen::VectorXd stationary() const;

  /// Unconditional return level (I - Phi)^{-1} c_k for regime k.
  Eigen::VectorXd steady_returns(int regime) const;

  /// Two-asset, three-regime calibration with the bull/neutral/bear
  /// drifts and covariances and the named transition-mix scenario.
  static RegimeVarModel two_asset(Scenario scenario);
};

/// One simulator step: returns realize under the current regime's drift
/// and covariance, then the regime transitions.
std::pair<Eigen::VectorXd, int> rs_var_step(const RegimeVarModel& model,
                                            const Eigen::VectorXd& current_returns,
                                            int current_regime, math::Rng& rng);

/// Weights drifted by one period of returns: value-weighting the
/// previous allocation with gross asset returns (cash grows at the risk
/// free rate).
Eigen::VectorXd drift_weights(const Eigen::VectorXd& prev_weights,
                              const Eigen::VectorXd& log_returns,
                              double risk_free);

/// Sequential portfolio environment over the RS-VAR model. The action
/// covers N risky sleeves plus cash; the reward is the net portfolio
/// return minus the proportional L1 turnover cost against the drifted
/// pre-trade weights.
class RsVarEnv : public Environment {
 public:
  RsVarEnv(const RegimeVarModel& model, double cost_rate, int episode_steps);

  int num_assets() const override { return model_.num_assets + 1; }
  int feature_dim() const override {
    return (model_.num_assets + 1) + model_.num_assets + model_.num_regimes;
  }
  int horizon() const override { return episode_steps_; }

  MarketState reset(math::Rng& rng) override;
  StepOutcome step(const MarketState& state, const PortfolioAction& action,
                   math::Rng& rng) override;
  Eigen::VectorXd features(const MarketState& state) const override;

  const RegimeVarModel& model() const { return model_; }
  double cost_rate() const { return cost_rate_; }

  /// Reward for taking `action` in `state` given realized next-period
  /// log-returns: shared by the sequential loop and the model-based
  /// buffer builder.
  double reward_for(const MarketState& state, const Eigen::VectorXd& action,
                    const Eigen::VectorXd& next_log_returns) const;

 private:
  RegimeVarModel model_;
  double cost_rate_;
  int episode_steps_;
};

}  // namespace qprl::env
