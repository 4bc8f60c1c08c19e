#pragma once

#include <Eigen/Core>

#include "qprl/math/rng.hpp"

namespace qprl::math {

/// Numerically stable softmax; output sums to one and is invariant to
/// adding a constant to every entry.
Eigen::VectorXd softmax(const Eigen::VectorXd& raw);

double digamma(double x);
double trigamma(double x);
double log_beta(const Eigen::VectorXd& alpha);

/// Gamma(shape, 1) draw, Marsaglia-Tsang. shape > 0.
double sample_gamma(double shape, Rng& rng);

struct GaussianSample {
  Eigen::VectorXd raw;      // mean + sigma * z
  Eigen::VectorXd weights;  // softmax(raw)
  double log_prob;          // Gaussian log-density of raw
};

/// Isotropic Gaussian draw in raw space mapped to the simplex by softmax.
/// The log-probability is the Gaussian density of the raw vector; the
/// softmax Jacobian is omitted because scores are taken w.r.t. the raw
/// sampling path.
GaussianSample gaussian_policy_sample(const Eigen::VectorXd& mean, double sigma,
                                      Rng& rng);

double gaussian_log_prob(const Eigen::VectorXd& raw, const Eigen::VectorXd& mean,
                         double sigma);
double gaussian_entropy(int dim, double sigma);

struct DirichletSample {
  Eigen::VectorXd weights;
  double log_prob;
};

/// Throws std::domain_error on any nonpositive concentration entry.
DirichletSample dirichlet_sample(const Eigen::VectorXd& concentration, Rng& rng);

double dirichlet_log_prob(const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& concentration);
double dirichlet_entropy(const Eigen::VectorXd& concentration);

/// d entropy / d concentration_i, used by the entropy-regularized policy
/// gradient.
Eigen::VectorXd dirichlet_entropy_grad(const Eigen::VectorXd& concentration);

}  // namespace qprl::math
