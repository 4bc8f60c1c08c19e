#include "qprl/env/historical.hpp"

#include <cmath>
#include <stdexcept>

namespace qprl::env {

MarketState rebalance(const MarketState& state, const Eigen::VectorXd& target_weights,
                      const Eigen::VectorXd& prices, const CostSchedule& cost) {
  cost.validate();
  // cash is the implicit residual sleeve: weights may sum to less than one
  if ((target_weights.array() < -1e-9).any() ||
      target_weights.sum() > 1.0 + 1e-9) {
    throw std::invalid_argument("rebalance: target weights must be nonnegative and sum to at most one");
  }
  if ((prices.array() <= 0.0).any()) {
    throw std::runtime_error("rebalance: nonpositive price");
  }
  const int n = static_cast<int>(prices.size());
  if (state.shares.size() != n || target_weights.size() != n) {
    throw std::invalid_argument("rebalance: dimension mismatch");
  }

  const double wealth = state.shares.dot(prices) + state.balance;
  MarketState next = state;

  // sells first
  double cash = state.balance;
  Eigen::VectorXd buy_notional = Eigen::VectorXd::Zero(n);
  double buy_total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double current = next.shares(i) * prices(i);
    const double target = target_weights(i) * wealth;
    const double diff = target - current;
    if (diff < 0.0) {
      const double sell = std::min(-diff, current);
      next.shares(i) -= sell / prices(i);
      if (next.shares(i) < 0.0) next.shares(i) = 0.0;
      cash += sell * (1.0 - cost.rate);
    } else if (diff > 0.0) {
      buy_notional(i) = diff;
      buy_total += diff;
    }
  }

  // buys, scaled back pro rata if the cash demand exceeds what is available
  if (buy_total > 0.0) {
    const double ratio = buy_total > cash ? cash / buy_total : 1.0;
    for (int i = 0; i < n; ++i) {
      if (buy_notional(i) <= 0.0) continue;
      const double spend = buy_notional(i) * ratio;
      next.shares(i) += spend * (1.0 - cost.rate) / prices(i);
      cash -= spend;
    }
    if (cash < 0.0) cash = 0.0;
  }

  next.balance = cash * cost.balance_interest;
  next.wealth = next.shares.dot(prices) + next.balance;
  return next;
}

HistoricalEnv::HistoricalEnv(const ReturnsTable& table, int start_row, int end_row,
                             const HistoricalConfig& config)
    : table_(table), config_(config) {
  config_.cost.validate();
  if (table_.rows() == 0) throw std::runtime_error("historical env: empty data");
  if (!table_.returns.allFinite()) {
    throw std::runtime_error("historical env: non-finite returns");
  }
  const int warmup = zscore_warmup(config_.zscore_window);
  start_row_ = std::max(start_row, warmup);
  end_row_ = std::min(end_row, table_.rows());
  if (end_row_ - start_row_ < 2) {
    throw std::runtime_error("historical env: index range too short after warm-up");
  }

  prices_.resize(table_.rows(), table_.returns.cols());
  for (int c = 0; c < table_.returns.cols(); ++c) {
    double level = 1.0;
    for (int r = 0; r < table_.rows(); ++r) {
      level *= 1.0 + table_.returns(r, c);
      if (level <= 0.0) {
        throw std::runtime_error("historical env: price path hit zero");
      }
      prices_(r, c) = level;
    }
  }
  scaled_returns_ = rolling_zscore(table_.returns, config_.zscore_window);
  if (table_.features.cols() > 0) {
    scaled_features_ = rolling_zscore(table_.features, config_.zscore_window);
  } else {
    scaled_features_.resize(table_.rows(), 0);
  }
}

int HistoricalEnv::feature_dim() const {
  return 2 + num_assets() + static_cast<int>(scaled_returns_.cols()) +
         static_cast<int>(scaled_features_.cols());
}

MarketState HistoricalEnv::reset(math::Rng& rng) {
  (void)rng;  // deterministic start: the equal-weighted portfolio
  MarketState state;
  state.step = start_row_;
  const int n = num_assets();
  state.shares.resize(n);
  for (int i = 0; i < n; ++i) {
    state.shares(i) = (config_.initial_wealth / n) / prices_(start_row_, i);
  }
  state.balance = 0.0;
  state.wealth = config_.initial_wealth;
  state.prev_weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  state.exogenous = scaled_returns_.row(start_row_);
  return state;
}

StepOutcome HistoricalEnv::step(const MarketState& state, const PortfolioAction& action,
                                math::Rng& rng) {
  (void)rng;
  if (state.step + 1 >= end_row_) {
    throw std::logic_error("historical env: step past the end of the range");
  }
  const int row = state.step;
  const Eigen::VectorXd price_now = prices_.row(row);
  MarketState traded = rebalance(state, action.weights, price_now, config_.cost);

  StepOutcome outcome;
  outcome.next = std::move(traded);
  outcome.next.step = row + 1;
  const Eigen::VectorXd price_next = prices_.row(row + 1);
  outcome.next.wealth = outcome.next.shares.dot(price_next) + outcome.next.balance;
  outcome.next.exogenous = scaled_returns_.row(row + 1);
  outcome.next.prev_weights = action.weights;
  outcome.reward =
      std::log(outcome.next.wealth / state.wealth) * config_.reward_scale;
  outcome.terminal = outcome.next.step + 1 >= end_row_;
  return outcome;
}

Eigen::VectorXd HistoricalEnv::features(const MarketState& state) const {
  Eigen::VectorXd f(feature_dim());
  int offset = 0;
  f(offset++) = state.wealth * config_.wealth_scale;
  for (int i = 0; i < num_assets(); ++i) {
    f(offset++) = state.shares(i) * config_.shares_scale;
  }
  f(offset++) = state.balance * config_.balance_scale;
  const int row = state.step;
  for (int c = 0; c < scaled_returns_.cols(); ++c) {
    f(offset++) = scaled_returns_(row, c);
  }
  for (int c = 0; c < scaled_features_.cols(); ++c) {
    f(offset++) = scaled_features_(row, c);
  }
  return f;
}

}  // namespace qprl::env
