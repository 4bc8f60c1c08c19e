#include "qprl/env/rs_var.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace qprl::env {

Scenario scenario_from_string(const std::string& name) {
  if (name == "bull-bear") return Scenario::BullBear;
  if (name == "neutral-bear") return Scenario::NeutralBear;
  if (name == "bull-neutral") return Scenario::BullNeutral;
  throw std::invalid_argument("unknown scenario: " + name);
}

std::string scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::BullBear: return "bull-bear";
    case Scenario::NeutralBear: return "neutral-bear";
    case Scenario::BullNeutral: return "bull-neutral";
  }
  return "?";
}

void RegimeVarModel::validate() const {
  if (num_regimes < 1 || num_assets < 1) {
    throw std::invalid_argument("rs-var: empty regime or asset space");
  }
  if (static_cast<int>(drift.size()) != num_regimes ||
      static_cast<int>(sigma.size()) != num_regimes) {
    throw std::invalid_argument("rs-var: per-regime parameter count mismatch");
  }
  if (phi.rows() != num_assets || phi.cols() != num_assets) {
    throw std::invalid_argument("rs-var: Phi shape mismatch");
  }
  if (q.rows() != num_regimes || q.cols() != num_regimes || (q.array() < 0.0).any()) {
    throw std::invalid_argument("rs-var: invalid transition matrix");
  }
  for (int k = 0; k < num_regimes; ++k) {
    if (std::abs(q.row(k).sum() - 1.0) > 1e-12) {
      throw std::invalid_argument("rs-var: transition row does not sum to one");
    }
    if (drift[k].size() != num_assets) {
      throw std::invalid_argument("rs-var: drift length mismatch");
    }
    const Eigen::MatrixXd& s = sigma[k];
    if (s.rows() != num_assets || s.cols() != num_assets ||
        !s.isApprox(s.transpose(), 1e-12)) {
      throw std::invalid_argument("rs-var: covariance must be symmetric");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success && s.norm() > 0.0) {
      throw std::invalid_argument("rs-var: covariance not positive semidefinite");
    }
  }
  if (risk_free <= 0.0) throw std::invalid_argument("rs-var: bad risk-free rate");
}

Eigen::VectorXd RegimeVarModel::stationary() const {
  // stack (Q' - I) with a ones row; minimal-norm least squares
  const int k = num_regimes;
  Eigen::MatrixXd a(k + 1, k);
  a.topRows(k) = q.transpose() - Eigen::MatrixXd::Identity(k, k);
  a.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 1);
  b(k) = 1.0;
  Eigen::VectorXd pi =
      a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

Eigen::VectorXd RegimeVarModel::steady_returns(int regime) const {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(num_assets, num_assets);
  return (eye - phi).partialPivLu().solve(drift[regime]);
}

RegimeVarModel RegimeVarModel::two_asset(Scenario scenario) {
  RegimeVarModel model;
  model.num_regimes = 3;
  model.num_assets = 2;
  model.phi.resize(2, 2);
  model.phi << 0.15, 0.10, 0.10, 0.15;
  model.drift = {
      (Eigen::VectorXd(2) << 0.0040, 0.0030).finished(),   // bull
      (Eigen::VectorXd(2) << 0.0030, 0.0028).finished(),   // neutral
      (Eigen::VectorXd(2) << -0.0090, 0.0030).finished(),  // bear
  };
  Eigen::MatrixXd bull(2, 2), neutral(2, 2), bear(2, 2);
  bull << 0.0005, 0.00010, 0.00010, 0.00045;
  neutral << 0.0018, 0.0, 0.0, 0.0014;
  bear << 0.0050, -0.0030, -0.0030, 0.0020;
  model.sigma = {bull, neutral, bear};
  model.q.resize(3, 3);
  switch (scenario) {
    case Scenario::BullBear:
      model.q << 0.74, 0.02, 0.24, 0.10, 0.82, 0.08, 0.30, 0.02, 0.68;
      break;
    case Scenario::NeutralBear:
      model.q << 0.82, 0.08, 0.10, 0.02, 0.68, 0.30, 0.02, 0.24, 0.74;
      break;
    case Scenario::BullNeutral:
      model.q << 0.74, 0.24, 0.02, 0.30, 0.68, 0.02, 0.10, 0.08, 0.82;
      break;
  }
  model.risk_free = 1.001;
  model.validate();
  return model;
}

std::pair<Eigen::VectorXd, int> rs_var_step(const RegimeVarModel& model,
                                            const Eigen::VectorXd& current_returns,
                                            int current_regime, math::Rng& rng) {
  const int n = model.num_assets;
  Eigen::VectorXd shock = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd& cov = model.sigma[current_regime];
  if (cov.norm() > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = rng.normal();
    shock = llt.matrixL() * z;
  }
  Eigen::VectorXd next =
      model.drift[current_regime] + model.phi * current_returns + shock;

  const double u = rng.uniform();
  double cumulative = 0.0;
  int next_regime = model.num_regimes - 1;
  for (int k = 0; k < model.num_regimes; ++k) {
    cumulative += model.q(current_regime, k);
    if (u <= cumulative) {
      next_regime = k;
      break;
    }
  }
  return {std::move(next), next_regime};
}

Eigen::VectorXd drift_weights(const Eigen::VectorXd& prev_weights,
                              const Eigen::VectorXd& log_returns,
                              double risk_free) {
  const int n = static_cast<int>(log_returns.size());
  Eigen::VectorXd value(prev_weights.size());
  for (int i = 0; i < n; ++i) value(i) = prev_weights(i) * std::exp(log_returns(i));
  value(n) = prev_weights(n) * risk_free;  // cash sleeve
  const double total = value.sum();
  if (total <= 0.0) return prev_weights;
  return value / total;
}

RsVarEnv::RsVarEnv(const RegimeVarModel& model, double cost_rate, int episode_steps)
    : model_(model), cost_rate_(cost_rate), episode_steps_(episode_steps) {
  model_.validate();
  if (cost_rate < 0.0) throw std::invalid_argument("rs-var env: negative cost");
  if (episode_steps < 1) throw std::invalid_argument("rs-var env: empty episode");
}

MarketState RsVarEnv::reset(math::Rng& rng) {
  MarketState state;
  const Eigen::VectorXd pi = model_.stationary();
  const double u = rng.uniform();
  double cumulative = 0.0;
  state.regime = model_.num_regimes - 1;
  for (int k = 0; k < model_.num_regimes; ++k) {
    cumulative += pi(k);
    if (u <= cumulative) {
      state.regime = k;
      break;
    }
  }
  state.exogenous = model_.steady_returns(state.regime);
  state.prev_weights =
      Eigen::VectorXd::Constant(num_assets(), 1.0 / num_assets());
  state.wealth = 1.0;
  state.step = 0;
  return state;
}

double RsVarEnv::reward_for(const MarketState& state, const Eigen::VectorXd& action,
                            const Eigen::VectorXd& next_log_returns) const {
  const int n = model_.num_assets;
  const Eigen::VectorXd pre_trade =
      drift_weights(state.prev_weights, state.exogenous, model_.risk_free);
  const double turnover = 0.5 * (action - pre_trade).cwiseAbs().sum();
  double gross = action(n) * model_.risk_free;
  for (int i = 0; i < n; ++i) gross += action(i) * std::exp(next_log_returns(i));
  return gross - 1.0 - cost_rate_ * turnover;
}

StepOutcome RsVarEnv::step(const MarketState& state, const PortfolioAction& action,
                           math::Rng& rng) {
  check_simplex(action.weights);
  if (action.weights.size() != num_assets()) {
    throw std::invalid_argument("rs-var env: action dimension mismatch");
  }
  auto [next_returns, next_regime] =
      rs_var_step(model_, state.exogenous, state.regime, rng);

  StepOutcome outcome;
  outcome.reward = reward_for(state, action.weights, next_returns);
  outcome.next.prev_weights = action.weights;
  outcome.next.exogenous = std::move(next_returns);
  outcome.next.regime = next_regime;
  outcome.next.step = state.step + 1;
  outcome.next.wealth = state.wealth * (1.0 + outcome.reward);
  outcome.terminal = outcome.next.step >= episode_steps_;
  return outcome;
}

Eigen::VectorXd RsVarEnv::features(const MarketState& state) const {
  Eigen::VectorXd f(feature_dim());
  int offset = 0;
  f.segment(offset, num_assets()) = state.prev_weights;
  offset += num_assets();
  f.segment(offset, model_.num_assets) = state.exogenous;
  offset += model_.num_assets;
  for (int k = 0; k < model_.num_regimes; ++k) {
    f(offset + k) = (state.regime == k) ? 1.0 : 0.0;
  }
  return f;
}

}  // namespace qprl::env
