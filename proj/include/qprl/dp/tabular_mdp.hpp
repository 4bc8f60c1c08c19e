#pragma once

#include <Eigen/Core>
#include <vector>

#include "qprl/math/rng.hpp"

namespace qprl::dp {

/// Finite MDP: rewards r(s,a) or, when `reward_sas` is filled,
/// r(s,a,s'); transitions P(s'|s,a) stored per action as S x S' rows.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  Eigen::MatrixXd reward;                    // S x A
  std::vector<Eigen::MatrixXd> reward_sas;   // optional, per action S x S'
  std::vector<Eigen::MatrixXd> transition;   // per action, S x S'
  double discount = 0.0;

  bool has_sas_rewards() const { return !reward_sas.empty(); }
  double reward_at(int s, int a, int next) const {
    return has_sas_rewards() ? reward_sas[a](s, next) : reward(s, a);
  }

  /// Throws std::invalid_argument when transition rows do not sum to one
  /// within 1e-12, rewards are non-finite, or discount lies outside [0, 1).
  void validate() const;

  static TabularMdp random(int num_states, int num_actions, double discount,
                           math::Rng& rng);
};

/// Ordered quantile levels with the preference level marked.
struct QuantileGrid {
  std::vector<double> levels;
  int target_index = 0;

  double target() const { return levels[target_index]; }
  int size() const { return static_cast<int>(levels.size()); }

  /// Throws unless 0 < tau_1 < ... < tau_p < 1 and the target index is
  /// in range.
  void validate() const;

  /// p evenly spaced levels on [lo, hi]; the target index points at the
  /// level closest to `target_tau` (must match within 1e-9).
  static QuantileGrid linspace(double lo, double hi, int p, double target_tau);
};

}  // namespace qprl::dp
