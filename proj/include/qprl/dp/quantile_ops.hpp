#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "qprl/dp/tabular_mdp.hpp"

namespace qprl::dp {

/// tau-quantile of a discrete distribution: the smallest atom whose
/// cumulative probability reaches tau (left-continuous inf convention,
/// no interpolation). Probabilities must sum to one within 1e-10.
double discrete_quantile(std::span<const double> atoms,
                         std::span<const double> probs, double tau);

/// Stochastic policy as an S x A matrix of action probabilities.
using PolicyMatrix = Eigen::MatrixXd;

/// One application of the policy quantile Bellman operator: for each
/// state the tau-quantile of r + discount * V(s') over the joint law of
/// (a, s') under policy * P. OpenMP-parallel across states.
Eigen::VectorXd policy_operator(const TabularMdp& mdp, const Eigen::VectorXd& values,
                                const PolicyMatrix& policy, double tau);

struct GreedyBackup {
  Eigen::VectorXd values;
  std::vector<int> greedy_actions;  // argmax, ties to the lowest index
};

/// Optimality version: per-action quantile backup and argmax.
GreedyBackup optimality_operator(const TabularMdp& mdp,
                                 const Eigen::VectorXd& values, double tau);

/// Serial reference implementations of the two operators; kept for the
/// test suite and the kernel benchmark.
Eigen::VectorXd policy_operator_serial(const TabularMdp& mdp,
                                       const Eigen::VectorXd& values,
                                       const PolicyMatrix& policy, double tau);
GreedyBackup optimality_operator_serial(const TabularMdp& mdp,
                                        const Eigen::VectorXd& values, double tau);

struct ValueIterationResult {
  Eigen::VectorXd values;
  std::vector<int> policy;
  std::vector<double> residuals;  // sup-norm change per sweep
  bool converged = false;
  int sweeps = 0;
};

/// Iterates V <- T_* V until the sup-norm residual drops below `tol`.
/// A run that exhausts max_sweeps returns converged=false with the full
/// residual history rather than throwing.
ValueIterationResult value_iteration(const TabularMdp& mdp, double tau, double tol,
                                     int max_sweeps);

}  // namespace qprl::dp
