#pragma once

#include <Eigen/Core>

#include "qprl/math/rng.hpp"

namespace qprl::env {

/// Nonnegative weights over risky assets (plus cash, where the
/// environment models it explicitly) summing to one.
struct PortfolioAction {
  Eigen::VectorXd weights;
};

struct MarketState {
  double wealth = 0.0;
  Eigen::VectorXd shares;        // units per asset (historical env)
  double balance = 0.0;          // cash
  Eigen::VectorXd exogenous;     // feature snapshot for the current step
  int regime = 0;                // simulated envs only
  int step = 0;
  Eigen::VectorXd prev_weights;  // pre-trade weights (simulated RS-VAR env)
};

struct StepOutcome {
  MarketState next;
  double reward = 0.0;
  bool terminal = false;
};

/// Single-writer Markov environment. Instances are independent; run one
/// per seed when fanning out.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int num_assets() const = 0;   // action simplex dimension
  virtual int feature_dim() const = 0;
  virtual int horizon() const = 0;      // steps per episode

  virtual MarketState reset(math::Rng& rng) = 0;
  virtual StepOutcome step(const MarketState& state, const PortfolioAction& action,
                           math::Rng& rng) = 0;

  /// Network input for a state, with the environment's feature scaling
  /// already applied.
  virtual Eigen::VectorXd features(const MarketState& state) const = 0;

  /// Positive-homogeneity factor for critic values at this state: head
  /// outputs are per-unit values multiplied by this scale. Environments
  /// whose value functions scale with wealth override it.
  virtual double value_scale(const MarketState& state) const {
    (void)state;
    return 1.0;
  }
};

struct CostSchedule {
  double rate = 0.0;              // proportional cost on traded notional
  double balance_interest = 1.0;  // gross per-step rate on cash

  void validate() const;
};

/// Checks weights are nonnegative and sum to one within `tol`.
void check_simplex(const Eigen::VectorXd& weights, double tol = 1e-9);

}  // namespace qprl::env
