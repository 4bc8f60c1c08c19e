#pragma once

#include <cmath>
#include <tuple>
#include <vector>

#include "qprl/dp/tabular_mdp.hpp"
#include "qprl/math/normal.hpp"

namespace qprl::testsupport {

/// Discretized i.i.d. two-period wealth problem. Layers: decision epoch
/// 0, decision epoch 1, absorbing terminal wealth states. The final
/// transition pays discount * terminal wealth via r(s,a,s'), so the
/// optimal value at the epoch-0 node approximates
/// discount^2 * W0 * m^2 with m = max(Q_tau[R], R_f).
struct WealthMdp {
  dp::TabularMdp mdp;
  std::vector<double> wealth_grid;
  int start_state = 0;  // epoch-0 node nearest W0
};

inline WealthMdp build_two_period_wealth_mdp(double mu, double sd, double risk_free,
                                             double discount, double w0,
                                             int return_atoms, int wealth_points,
                                             int alpha_points) {
  WealthMdp out;

  std::vector<double> atoms(return_atoms);
  const double atom_prob = 1.0 / return_atoms;
  for (int i = 0; i < return_atoms; ++i) {
    atoms[i] = math::normal_quantile((i + 0.5) / return_atoms, mu, sd);
  }

  // geometric wealth grid wide enough for two compounded periods
  const double span = std::max(std::abs(mu - 1.0) + 4.0 * sd, risk_free - 1.0) + 0.05;
  const double lo = w0 * std::pow(1.0 - std::min(span, 0.9), 2);
  const double hi = w0 * std::pow(1.0 + span, 2);
  out.wealth_grid.resize(wealth_points);
  for (int i = 0; i < wealth_points; ++i) {
    out.wealth_grid[i] =
        lo * std::pow(hi / lo, static_cast<double>(i) / (wealth_points - 1));
  }
  const auto snap = [&](double w) {
    // geometric spacing: nearest in log space
    const double ratio = std::log(w / lo) / std::log(hi / lo);
    int idx = static_cast<int>(std::lround(ratio * (wealth_points - 1)));
    if (idx < 0) idx = 0;
    if (idx >= wealth_points) idx = wealth_points - 1;
    return idx;
  };

  dp::TabularMdp& mdp = out.mdp;
  mdp.num_states = 3 * wealth_points;
  mdp.num_actions = alpha_points;
  mdp.discount = discount;
  mdp.transition.assign(alpha_points,
                        Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_states));
  mdp.reward_sas.assign(alpha_points,
                        Eigen::MatrixXd::Zero(mdp.num_states, mdp.num_states));

  const int layer1 = wealth_points;
  const int layer2 = 2 * wealth_points;
  for (int a = 0; a < alpha_points; ++a) {
    const double alpha = static_cast<double>(a) / (alpha_points - 1);
    for (int wi = 0; wi < wealth_points; ++wi) {
      const double w = out.wealth_grid[wi];
      for (int k = 0; k < return_atoms; ++k) {
        const double next = w * (alpha * atoms[k] + (1.0 - alpha) * risk_free);
        // epoch 0 -> epoch 1: zero flow reward
        mdp.transition[a](wi, layer1 + snap(next)) += atom_prob;
        // epoch 1 -> terminal: pays discount * realized terminal wealth
        const int target = layer2 + snap(next);
        mdp.transition[a](layer1 + wi, target) += atom_prob;
        mdp.reward_sas[a](layer1 + wi, target) =
            discount * out.wealth_grid[snap(next)];
      }
      mdp.transition[a](layer2 + wi, layer2 + wi) = 1.0;
    }
  }
  // normalize away accumulation dust so validate() passes
  for (int a = 0; a < alpha_points; ++a) {
    for (int s = 0; s < mdp.num_states; ++s) {
      const double total = mdp.transition[a].row(s).sum();
      mdp.transition[a].row(s) /= total;
    }
  }
  mdp.validate();
  out.start_state = snap(w0);
  return out;
}

}  // namespace qprl::testsupport
