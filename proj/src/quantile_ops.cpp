#include "qprl/dp/quantile_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qprl::dp {

double discrete_quantile(std::span<const double> atoms,
                         std::span<const double> probs, double tau) {
  if (atoms.empty()) throw std::domain_error("discrete_quantile: empty support");
  if (atoms.size() != probs.size()) {
    throw std::invalid_argument("discrete_quantile: atoms/probs size mismatch");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("discrete_quantile: tau must lie in (0, 1)");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-10) {
    throw std::invalid_argument("discrete_quantile: probabilities must sum to one");
  }
  std::vector<int> order(atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return atoms[i] < atoms[j]; });
  double cumulative = 0.0;
  for (int idx : order) {
    cumulative += probs[idx];
    if (cumulative >= tau - 1e-12) return atoms[idx];
  }
  return atoms[order.back()];
}

namespace {

// Quantile backup for one state; scratch buffers are reused across calls.
double state_policy_backup(const TabularMdp& mdp, const Eigen::VectorXd& values,
                           const PolicyMatrix& policy, double tau, int s,
                           std::vector<double>& atoms, std::vector<double>& probs) {
  atoms.clear();
  probs.clear();
  for (int a = 0; a < mdp.num_actions; ++a) {
    const double pa = policy(s, a);
    if (pa == 0.0) continue;
    for (int next = 0; next < mdp.num_states; ++next) {
      const double pn = mdp.transition[a](s, next);
      if (pn == 0.0) continue;
      atoms.push_back(mdp.reward_at(s, a, next) + mdp.discount * values(next));
      probs.push_back(pa * pn);
    }
  }
  return discrete_quantile(atoms, probs, tau);
}

std::pair<double, int> state_greedy_backup(const TabularMdp& mdp,
                                           const Eigen::VectorXd& values, double tau,
                                           int s, std::vector<double>& atoms,
                                           std::vector<double>& probs) {
  double best = -std::numeric_limits<double>::infinity();
  int best_action = 0;
  for (int a = 0; a < mdp.num_actions; ++a) {
    atoms.clear();
    probs.clear();
    for (int next = 0; next < mdp.num_states; ++next) {
      const double pn = mdp.transition[a](s, next);
      if (pn == 0.0) continue;
      atoms.push_back(mdp.reward_at(s, a, next) + mdp.discount * values(next));
      probs.push_back(pn);
    }
    const double q = discrete_quantile(atoms, probs, tau);
    if (q > best) {
      best = q;
      best_action = a;
    }
  }
  return {best, best_action};
}

}  // namespace

Eigen::VectorXd policy_operator(const TabularMdp& mdp, const Eigen::VectorXd& values,
                                const PolicyMatrix& policy, double tau) {
  if (values.size() != mdp.num_states) {
    throw std::invalid_argument("policy_operator: value vector length mismatch");
  }
  Eigen::VectorXd out(mdp.num_states);
#pragma omp parallel
  {
    std::vector<double> atoms, probs;
#pragma omp for schedule(static)
    for (int s = 0; s < mdp.num_states; ++s) {
      out(s) = state_policy_backup(mdp, values, policy, tau, s, atoms, probs);
    }
  }
  return out;
}

Eigen::VectorXd policy_operator_serial(const TabularMdp& mdp,
                                       const Eigen::VectorXd& values,
                                       const PolicyMatrix& policy, double tau) {
  Eigen::VectorXd out(mdp.num_states);
  std::vector<double> atoms, probs;
  for (int s = 0; s < mdp.num_states; ++s) {
    out(s) = state_policy_backup(mdp, values, policy, tau, s, atoms, probs);
  }
  return out;
}

GreedyBackup optimality_operator(const TabularMdp& mdp,
                                 const Eigen::VectorXd& values, double tau) {
  if (values.size() != mdp.num_states) {
    throw std::invalid_argument("optimality_operator: value vector length mismatch");
  }
  GreedyBackup result;
  result.values.resize(mdp.num_states);
  result.greedy_actions.resize(mdp.num_states);
#pragma omp parallel
  {
    std::vector<double> atoms, probs;
#pragma omp for schedule(static)
    for (int s = 0; s < mdp.num_states; ++s) {
      const auto [value, action] =
          state_greedy_backup(mdp, values, tau, s, atoms, probs);
      result.values(s) = value;
      result.greedy_actions[s] = action;
    }
  }
  return result;
}

GreedyBackup optimality_operator_serial(const TabularMdp& mdp,
                                        const Eigen::VectorXd& values, double tau) {
  GreedyBackup result;
  result.values.resize(mdp.num_states);
  result.greedy_actions.resize(mdp.num_states);
  std::vector<double> atoms, probs;
  for (int s = 0; s < mdp.num_states; ++s) {
    const auto [value, action] = state_greedy_backup(mdp, values, tau, s, atoms, probs);
    result.values(s) = value;
    result.greedy_actions[s] = action;
  }
  return result;
}

ValueIterationResult value_iteration(const TabularMdp& mdp, double tau, double tol,
                                     int max_sweeps) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
  ValueIterationResult result;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(mdp.num_states);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    GreedyBackup backup = optimality_operator(mdp, values, tau);
    const double residual = (backup.values - values).cwiseAbs().maxCoeff();
    result.residuals.push_back(residual);
    values = std::move(backup.values);
    result.policy = std::move(backup.greedy_actions);
    result.sweeps = sweep + 1;
    if (residual < tol) {
      result.converged = true;
      break;
    }
  }
  result.values = std::move(values);
  return result;
}

}  // namespace qprl::dp
