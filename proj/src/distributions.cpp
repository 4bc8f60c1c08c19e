#include "qprl/math/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace qprl::math {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& raw) {
  const double shift = raw.maxCoeff();
  Eigen::VectorXd e = (raw.array() - shift).exp();
  return e / e.sum();
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: x must be positive");
  double result = 0.0;
  while (x < 6.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 / 42.0)));
  return result;
}

double log_beta(const Eigen::VectorXd& alpha) {
  double sum = 0.0;
  double total = 0.0;
  for (int i = 0; i < alpha.size(); ++i) {
    sum += std::lgamma(alpha(i));
    total += alpha(i);
  }
  return sum - std::lgamma(total);
}

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::domain_error("sample_gamma: shape must be positive");
  if (shape < 1.0) {
    // boost to shape+1 and scale back
    const double u = rng.uniform();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z = rng.normal();
    double v = 1.0 + c * z;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
      return d * v;
    }
  }
}

GaussianSample gaussian_policy_sample(const Eigen::VectorXd& mean, double sigma,
                                      Rng& rng) {
  if (!(sigma > 0.0)) throw std::domain_error("gaussian policy: sigma must be positive");
  GaussianSample sample;
  sample.raw.resize(mean.size());
  for (int i = 0; i < mean.size(); ++i) {
    sample.raw(i) = mean(i) + sigma * rng.normal();
  }
  sample.weights = softmax(sample.raw);
  sample.log_prob = gaussian_log_prob(sample.raw, mean, sigma);
  return sample;
}

double gaussian_log_prob(const Eigen::VectorXd& raw, const Eigen::VectorXd& mean,
                         double sigma) {
  const double n = static_cast<double>(raw.size());
  const double quad = (raw - mean).squaredNorm() / (2.0 * sigma * sigma);
  return -0.5 * n * (kLog2Pi + 2.0 * std::log(sigma)) - quad;
}

double gaussian_entropy(int dim, double sigma) {
  return 0.5 * dim * (kLog2Pi + 1.0 + 2.0 * std::log(sigma));
}

DirichletSample dirichlet_sample(const Eigen::VectorXd& concentration, Rng& rng) {
  for (int i = 0; i < concentration.size(); ++i) {
    if (!(concentration(i) > 0.0)) {
      throw std::domain_error("dirichlet: concentration entries must be positive");
    }
  }
  DirichletSample sample;
  sample.weights.resize(concentration.size());
  double total = 0.0;
  for (int i = 0; i < concentration.size(); ++i) {
    sample.weights(i) = sample_gamma(concentration(i), rng);
    total += sample.weights(i);
  }
  sample.weights /= total;
  // keep samples strictly interior so log-densities stay finite
  constexpr double kFloor = 1e-12;
  if ((sample.weights.array() < kFloor).any()) {
    sample.weights = sample.weights.array().max(kFloor);
    sample.weights /= sample.weights.sum();
  }
  sample.log_prob = dirichlet_log_prob(sample.weights, concentration);
  return sample;
}

double dirichlet_log_prob(const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& concentration) {
  double lp = -log_beta(concentration);
  for (int i = 0; i < weights.size(); ++i) {
    lp += (concentration(i) - 1.0) * std::log(weights(i));
  }
  return lp;
}

double dirichlet_entropy(const Eigen::VectorXd& concentration) {
  const double a0 = concentration.sum();
  const double k = static_cast<double>(concentration.size());
  double h = log_beta(concentration) + (a0 - k) * digamma(a0);
  for (int i = 0; i < concentration.size(); ++i) {
    h -= (concentration(i) - 1.0) * digamma(concentration(i));
  }
  return h;
}

Eigen::VectorXd dirichlet_entropy_grad(const Eigen::VectorXd& concentration) {
  const double a0 = concentration.sum();
  const double k = static_cast<double>(concentration.size());
  Eigen::VectorXd grad(concentration.size());
  const double common = (a0 - k) * trigamma(a0);
  for (int i = 0; i < concentration.size(); ++i) {
    grad(i) = common - (concentration(i) - 1.0) * trigamma(concentration(i));
  }
  return grad;
}

}  // namespace qprl::math
