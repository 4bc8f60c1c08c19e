#pragma once

#include "qprl/dp/oracles.hpp"
#include "qprl/env/environment.hpp"

namespace qprl::env {

/// Episodic wrapper around the two-period volatility-regime world.
/// Actions are (risky, safe) weights; the flow reward is zero at t=0 and
/// discount * W_2 / W_0 at the final step, so value functions match the
/// closed-form solver up to the 1/W_0 normalization.
class TwoPeriodEnv : public Environment {
 public:
  explicit TwoPeriodEnv(const dp::TwoPeriodRegimeModel& model);

  int num_assets() const override { return 2; }
  int feature_dim() const override { return 4; }
  int horizon() const override { return 2; }

  MarketState reset(math::Rng& rng) override;
  StepOutcome step(const MarketState& state, const PortfolioAction& action,
                   math::Rng& rng) override;
  Eigen::VectorXd features(const MarketState& state) const override;
  double value_scale(const MarketState& state) const override;

  const dp::TwoPeriodRegimeModel& model() const { return model_; }

  /// Fixes the regime drawn at reset (used when probing one branch);
  /// pass -1 to restore the stationary draw.
  void force_initial_regime(int regime) { forced_regime_ = regime; }

 private:
  dp::TwoPeriodRegimeModel model_;
  int forced_regime_ = -1;
};

}  // namespace qprl::env
