#include "qprl/dp/tabular_mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace qprl::dp {

void TabularMdp::validate() const {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("mdp: empty state or action space");
  }
  if (!(discount >= 0.0 && discount < 1.0)) {
    throw std::invalid_argument("mdp: discount must lie in [0, 1)");
  }
  if (static_cast<int>(transition.size()) != num_actions) {
    throw std::invalid_argument("mdp: one transition matrix per action required");
  }
  for (const auto& p : transition) {
    if (p.rows() != num_states || p.cols() != num_states) {
      throw std::invalid_argument("mdp: transition matrix shape mismatch");
    }
    if ((p.array() < 0.0).any()) {
      throw std::invalid_argument("mdp: negative transition probability");
    }
    for (int s = 0; s < num_states; ++s) {
      if (std::abs(p.row(s).sum() - 1.0) > 1e-12) {
        throw std::invalid_argument("mdp: transition row does not sum to one");
      }
    }
  }
  if (has_sas_rewards()) {
    if (static_cast<int>(reward_sas.size()) != num_actions) {
      throw std::invalid_argument("mdp: reward_sas size mismatch");
    }
    for (const auto& r : reward_sas) {
      if (r.rows() != num_states || r.cols() != num_states || !r.allFinite()) {
        throw std::invalid_argument("mdp: invalid reward_sas tensor");
      }
    }
  } else {
    if (reward.rows() != num_states || reward.cols() != num_actions ||
        !reward.allFinite()) {
      throw std::invalid_argument("mdp: invalid reward matrix");
    }
  }
}

TabularMdp TabularMdp::random(int num_states, int num_actions, double discount,
                              math::Rng& rng) {
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.discount = discount;
  mdp.reward.resize(num_states, num_actions);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
  }
  for (int a = 0; a < num_actions; ++a) {
    Eigen::MatrixXd p(num_states, num_states);
    for (int s = 0; s < num_states; ++s) {
      double total = 0.0;
      for (int next = 0; next < num_states; ++next) {
        const double mass = rng.uniform();
        p(s, next) = mass;
        total += mass;
      }
      p.row(s) /= total;
      // renormalize exactly so validate()'s 1e-12 check is met
      p(s, num_states - 1) += 1.0 - p.row(s).sum();
    }
    mdp.transition.push_back(std::move(p));
  }
  return mdp;
}

void QuantileGrid::validate() const {
  if (levels.empty()) throw std::invalid_argument("quantile grid: empty");
  double prev = 0.0;
  for (double tau : levels) {
    if (!(tau > prev && tau < 1.0)) {
      throw std::invalid_argument("quantile grid: levels must be strictly increasing in (0, 1)");
    }
    prev = tau;
  }
  if (target_index < 0 || target_index >= size()) {
    throw std::invalid_argument("quantile grid: target index out of range");
  }
}

QuantileGrid QuantileGrid::linspace(double lo, double hi, int p, double target_tau) {
  if (p < 1) throw std::invalid_argument("quantile grid: p must be positive");
  QuantileGrid grid;
  grid.levels.resize(p);
  for (int j = 0; j < p; ++j) {
    grid.levels[j] = (p == 1) ? lo : lo + (hi - lo) * j / (p - 1);
  }
  int best = 0;
  for (int j = 1; j < p; ++j) {
    if (std::abs(grid.levels[j] - target_tau) <
        std::abs(grid.levels[best] - target_tau)) {
      best = j;
    }
  }
  if (std::abs(grid.levels[best] - target_tau) > 1e-9) {
    throw std::invalid_argument("quantile grid: target tau not on the grid");
  }
  grid.target_index = best;
  grid.validate();
  return grid;
}

}  // namespace qprl::dp
