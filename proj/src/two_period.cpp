#include "qprl/env/two_period.hpp"

namespace qprl::env {

TwoPeriodEnv::TwoPeriodEnv(const dp::TwoPeriodRegimeModel& model) : model_(model) {
  model_.validate();
}

MarketState TwoPeriodEnv::reset(math::Rng& rng) {
  MarketState state;
  state.wealth = model_.initial_wealth;
  state.step = 0;
  if (forced_regime_ >= 0) {
    state.regime = forced_regime_;
  } else {
    // stationary distribution of the two-state chain
    const double to_high = 1.0 - model_.p_low_stay;
    const double to_low = 1.0 - model_.p_high_stay;
    const double p_high = (to_high + to_low) > 0.0 ? to_high / (to_high + to_low) : 0.5;
    state.regime = rng.uniform() < p_high ? dp::kRegimeHigh : dp::kRegimeLow;
  }
  return state;
}

StepOutcome TwoPeriodEnv::step(const MarketState& state, const PortfolioAction& action,
                               math::Rng& rng) {
  check_simplex(action.weights);
  const double alpha = action.weights(0);
  const double sigma =
      state.regime == dp::kRegimeHigh ? model_.sigma_high : model_.sigma_low;
  const double gross_risky = rng.normal(model_.mean_return, sigma);
  const double portfolio =
      alpha * gross_risky + (1.0 - alpha) * model_.risk_free;

  StepOutcome outcome;
  outcome.next = state;
  outcome.next.wealth = state.wealth * portfolio;
  outcome.next.step = state.step + 1;
  const double stay =
      state.regime == dp::kRegimeHigh ? model_.p_high_stay : model_.p_low_stay;
  if (rng.uniform() >= stay) outcome.next.regime = 1 - state.regime;

  outcome.terminal = outcome.next.step >= 2;
  outcome.reward = outcome.terminal
                       ? model_.discount * outcome.next.wealth / model_.initial_wealth
                       : 0.0;
  return outcome;
}

Eigen::VectorXd TwoPeriodEnv::features(const MarketState& state) const {
  // wealth never enters: by positive homogeneity both the optimal policy
  // and the per-unit value depend only on (regime, period)
  Eigen::VectorXd f(4);
  f << (state.regime == dp::kRegimeLow ? 1.0 : 0.0),
      (state.regime == dp::kRegimeHigh ? 1.0 : 0.0),
      (state.step == 0 ? 1.0 : 0.0), (state.step == 1 ? 1.0 : 0.0);
  return f;
}

double TwoPeriodEnv::value_scale(const MarketState& state) const {
  return state.wealth / model_.initial_wealth;
}

}  // namespace qprl::env
