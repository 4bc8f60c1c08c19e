#include "qprl/rl/actor.hpp"

#include <cmath>
#include <stdexcept>

#include "qprl/math/distributions.hpp"
#include "qprl/math/losses.hpp"

namespace qprl::rl {

namespace {

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::VectorXd concentration_of(const ActorParams& params,
                                 const Eigen::VectorXd& head_out) {
  Eigen::VectorXd conc(head_out.size());
  for (int i = 0; i < head_out.size(); ++i) {
    conc(i) = softplus(head_out(i)) + params.concentration_bias;
  }
  return conc;
}

}  // namespace

void ActorParams::validate() const {
  net.validate();
  if (head == PolicyHead::GaussianSoftmax && !(sigma > 0.0)) {
    throw std::invalid_argument("actor: sigma must be positive");
  }
  if (entropy_coef < 0.0) {
    throw std::invalid_argument("actor: entropy coefficient must be nonnegative");
  }
}

ActorParams ActorParams::make(int input_dim, const std::vector<int>& hidden,
                              int num_assets, PolicyHead head, double sigma,
                              double weight_decay, math::Rng& rng) {
  ActorParams params;
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(num_assets);
  params.net = math::MlpParams::make(dims, rng, weight_decay);
  params.head = head;
  params.sigma = sigma;
  params.validate();
  return params;
}

ActionSample act(const ActorParams& params, const Eigen::VectorXd& features,
                 math::Rng& rng) {
  const Eigen::VectorXd head_out = math::mlp_forward(params.net, features);
  if (!head_out.allFinite()) {
    throw std::runtime_error("actor: non-finite policy head output");
  }
  ActionSample sample;
  if (params.head == PolicyHead::GaussianSoftmax) {
    auto draw = math::gaussian_policy_sample(head_out, params.sigma, rng);
    sample.raw = std::move(draw.raw);
    sample.action.weights = std::move(draw.weights);
    sample.log_prob = draw.log_prob;
    sample.entropy = math::gaussian_entropy(static_cast<int>(head_out.size()),
                                            params.sigma);
  } else {
    const Eigen::VectorXd conc = concentration_of(params, head_out);
    auto draw = math::dirichlet_sample(conc, rng);
    sample.action.weights = std::move(draw.weights);
    sample.log_prob = draw.log_prob;
    sample.entropy = math::dirichlet_entropy(conc);
  }
  return sample;
}

env::PortfolioAction mean_action(const ActorParams& params,
                                 const Eigen::VectorXd& features) {
  const Eigen::VectorXd head_out = math::mlp_forward(params.net, features);
  env::PortfolioAction action;
  if (params.head == PolicyHead::GaussianSoftmax) {
    action.weights = math::softmax(head_out);
  } else {
    const Eigen::VectorXd conc = concentration_of(params, head_out);
    action.weights = conc / conc.sum();
  }
  return action;
}

namespace {

struct SampleWork {
  double loss = 0.0;
  math::MlpGrads grads;
};

SampleWork actor_sample(const Transition& transition, double delta,
                        const ActorParams& params, double tau,
                        bool literal_paper_sign) {
  math::MlpTape tape;
  const Eigen::VectorXd head_out =
      math::mlp_forward(params.net, transition.features, &tape);

  // psi_tau(delta) * |delta|: tau-weighted on the upside, (1-tau) on the
  // downside, carrying delta's sign
  const double coeff = math::quantile_weight(delta, tau) * std::abs(delta);
  const double dloss_dlogprob = literal_paper_sign ? coeff : -coeff;

  SampleWork work;
  Eigen::VectorXd upstream;
  if (params.head == PolicyHead::GaussianSoftmax) {
    const double inv_var = 1.0 / (params.sigma * params.sigma);
    const double log_prob =
        math::gaussian_log_prob(transition.raw, head_out, params.sigma);
    const double entropy = math::gaussian_entropy(
        static_cast<int>(head_out.size()), params.sigma);
    work.loss = dloss_dlogprob * log_prob - params.entropy_coef * entropy;
    // d log_prob / d mean = (raw - mean) / sigma^2; entropy has no mean
    // dependence
    upstream = dloss_dlogprob * inv_var * (transition.raw - head_out);
  } else {
    const Eigen::VectorXd conc = concentration_of(params, head_out);
    const double conc_total = conc.sum();
    const double log_prob = math::dirichlet_log_prob(transition.action, conc);
    const double entropy = math::dirichlet_entropy(conc);
    work.loss = dloss_dlogprob * log_prob - params.entropy_coef * entropy;
    const Eigen::VectorXd entropy_grad = math::dirichlet_entropy_grad(conc);
    const double digamma_total = math::digamma(conc_total);
    upstream.resize(head_out.size());
    for (int i = 0; i < head_out.size(); ++i) {
      const double dlogprob_dconc =
          std::log(transition.action(i)) - math::digamma(conc(i)) + digamma_total;
      const double dloss_dconc = dloss_dlogprob * dlogprob_dconc -
                                 params.entropy_coef * entropy_grad(i);
      upstream(i) = dloss_dconc * sigmoid(head_out(i));
    }
  }
  work.grads = math::mlp_gradients(params.net, tape, upstream);
  work.loss += math::l2_penalty(params.net);
  return work;
}

ActorLossResult reduce_samples(std::vector<SampleWork>& samples,
                               std::span<const Transition> batch,
                               const ActorParams& params) {
  double weight_total = 0.0;
  for (const auto& t : batch) weight_total += t.weight;
  if (!(weight_total > 0.0)) {
    throw std::invalid_argument("actor_loss: degenerate batch, zero total weight");
  }
  ActorLossResult result;
  result.grads = math::MlpGrads::zeros_like(params.net);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = batch[i].weight / weight_total;
    result.loss += w * samples[i].loss;
    samples[i].grads *= w;
    result.grads += samples[i].grads;
  }
  return result;
}

}  // namespace

ActorLossResult actor_loss(std::span<const Transition> batch,
                           std::span<const double> target_td,
                           const ActorParams& params, double tau,
                           bool literal_paper_sign) {
  if (batch.empty()) throw std::invalid_argument("actor_loss: empty batch");
  if (batch.size() != target_td.size()) {
    throw std::invalid_argument("actor_loss: TD error count mismatch");
  }
  std::vector<SampleWork> samples(batch.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(batch.size()); ++i) {
    samples[i] =
        actor_sample(batch[i], target_td[i], params, tau, literal_paper_sign);
  }
  return reduce_samples(samples, batch, params);
}

ActorLossResult actor_loss_serial(std::span<const Transition> batch,
                                  std::span<const double> target_td,
                                  const ActorParams& params, double tau,
                                  bool literal_paper_sign) {
  if (batch.empty()) throw std::invalid_argument("actor_loss: empty batch");
  if (batch.size() != target_td.size()) {
    throw std::invalid_argument("actor_loss: TD error count mismatch");
  }
  std::vector<SampleWork> samples(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    samples[i] =
        actor_sample(batch[i], target_td[i], params, tau, literal_paper_sign);
  }
  return reduce_samples(samples, batch, params);
}

}  // namespace qprl::rl
