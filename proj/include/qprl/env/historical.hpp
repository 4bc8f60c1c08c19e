#pragma once

#include "qprl/env/data.hpp"
#include "qprl/env/environment.hpp"

namespace qprl::env {

/// Executes one rebalance toward `target_weights` at `prices`: sells
/// run first, buys are funded from balance plus sale proceeds, the
/// proportional cost is charged on each traded leg's notional, and buy
/// orders are scaled back pro rata when the cash demand exceeds what is
/// available. Interest then accrues on the remaining balance. Shares and
/// balance stay nonnegative.
MarketState rebalance(const MarketState& state, const Eigen::VectorXd& target_weights,
                      const Eigen::VectorXd& prices, const CostSchedule& cost);

struct HistoricalConfig {
  CostSchedule cost;
  double initial_wealth = 100.0;
  double reward_scale = 1221.0;
  int zscore_window = 60;
  // network-input multipliers for the endogenous block
  double wealth_scale = 0.0005;
  double shares_scale = 0.01;
  double balance_scale = 10.0;
};

/// Daily backtest environment over a loaded returns table. One episode
/// walks an index range [start, end); the first usable row is clamped to
/// the z-score warm-up. Rewards are scaled log wealth ratios.
class HistoricalEnv : public Environment {
 public:
  HistoricalEnv(const ReturnsTable& table, int start_row, int end_row,
                const HistoricalConfig& config);

  int num_assets() const override { return static_cast<int>(table_.returns.cols()); }
  int feature_dim() const override;
  int horizon() const override { return end_row_ - start_row_ - 1; }

  MarketState reset(math::Rng& rng) override;
  StepOutcome step(const MarketState& state, const PortfolioAction& action,
                   math::Rng& rng) override;
  Eigen::VectorXd features(const MarketState& state) const override;

  const Eigen::MatrixXd& prices() const { return prices_; }
  int start_row() const { return start_row_; }
  int end_row() const { return end_row_; }
  const HistoricalConfig& config() const { return config_; }

 private:
  ReturnsTable table_;
  HistoricalConfig config_;
  Eigen::MatrixXd prices_;           // cumulated from the full table
  Eigen::MatrixXd scaled_returns_;   // rolling z-scores of returns
  Eigen::MatrixXd scaled_features_;  // rolling z-scores of feat_ columns
  int start_row_ = 0;
  int end_row_ = 0;
};

}  // namespace qprl::env
