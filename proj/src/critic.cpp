#include "qprl/rl/critic.hpp"

#include <cmath>
#include <stdexcept>

#include "qprl/math/losses.hpp"

namespace qprl::rl {

void CriticParams::validate() const {
  grid.validate();
  online.validate();
  target.validate();
  if (online.output_dim() != grid.size() || target.output_dim() != grid.size()) {
    throw std::invalid_argument("critic: output width must equal the head count");
  }
  if (!(soft_update_rate > 0.0 && soft_update_rate <= 1.0)) {
    throw std::invalid_argument("critic: rho must lie in (0, 1]");
  }
  if (order_penalty < 0.0) {
    throw std::invalid_argument("critic: order penalty must be nonnegative");
  }
}

CriticParams CriticParams::make(int input_dim, const std::vector<int>& hidden,
                                const dp::QuantileGrid& grid, double order_penalty,
                                double soft_update_rate, double weight_decay,
                                math::Rng& rng) {
  CriticParams params;
  params.grid = grid;
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(grid.size());
  params.online = math::MlpParams::make(dims, rng, weight_decay);
  params.target = params.online;
  params.order_penalty = order_penalty;
  params.soft_update_rate = soft_update_rate;
  params.validate();
  return params;
}

Eigen::VectorXd value_vector(const math::MlpParams& net,
                             const Eigen::VectorXd& features) {
  return math::mlp_forward(net, features);
}

Eigen::VectorXd td_errors(const Transition& transition, const CriticParams& params,
                          double discount) {
  const Eigen::VectorXd online =
      transition.value_scale * value_vector(params.online, transition.features);
  Eigen::VectorXd target = Eigen::VectorXd::Constant(params.grid.size(),
                                                     transition.reward);
  if (!transition.terminal) {
    target += discount * transition.next_value_scale *
              value_vector(params.target, transition.next_features);
  }
  return (target - online) * params.td_scale;
}

namespace {

struct SampleWork {
  double loss = 0.0;
  math::MlpGrads grads;
  double target_td = 0.0;
};

SampleWork critic_sample(const Transition& transition, const CriticParams& params,
                         double discount) {
  const int heads = params.grid.size();
  math::MlpTape tape;
  const Eigen::VectorXd net_out =
      math::mlp_forward(params.online, transition.features, &tape);
  const Eigen::VectorXd online = transition.value_scale * net_out;
  Eigen::VectorXd target = Eigen::VectorXd::Constant(heads, transition.reward);
  if (!transition.terminal) {
    target += discount * transition.next_value_scale *
              value_vector(params.target, transition.next_features);
  }

  SampleWork work;
  Eigen::VectorXd upstream = Eigen::VectorXd::Zero(heads);
  for (int j = 0; j < heads; ++j) {
    const double tau = params.grid.levels[j];
    const double delta = (target(j) - online(j)) * params.td_scale;
    work.loss += math::pinball_loss(delta, tau);
    // d pinball / d net_j = slope * d delta / d net_j
    upstream(j) -=
        math::pinball_slope(delta, tau) * params.td_scale * transition.value_scale;
    if (j == params.grid.target_index) work.target_td = delta;
  }
  // monotonicity penalty on the per-unit head outputs (scale-free)
  for (int j = 0; j + 1 < heads; ++j) {
    const double gap = net_out(j) - net_out(j + 1);
    if (gap > 0.0) {
      work.loss += params.order_penalty * gap;
      upstream(j) += params.order_penalty;
      upstream(j + 1) -= params.order_penalty;
    }
  }
  work.grads = math::mlp_gradients(params.online, tape, upstream);
  work.loss += math::l2_penalty(params.online);
  return work;
}

CriticLossResult reduce_samples(std::vector<SampleWork>& samples,
                                std::span<const Transition> batch,
                                const CriticParams& params) {
  double weight_total = 0.0;
  for (const auto& t : batch) weight_total += t.weight;
  if (!(weight_total > 0.0)) {
    throw std::invalid_argument("critic_loss: degenerate batch, zero total weight");
  }
  CriticLossResult result;
  result.grads = math::MlpGrads::zeros_like(params.online);
  result.target_td.resize(batch.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = batch[i].weight / weight_total;
    result.loss += w * samples[i].loss;
    samples[i].grads *= w;
    result.grads += samples[i].grads;
    result.target_td[i] = samples[i].target_td;
  }
  return result;
}

}  // namespace

CriticLossResult critic_loss(std::span<const Transition> batch,
                             const CriticParams& params, double discount) {
  if (batch.empty()) throw std::invalid_argument("critic_loss: empty batch");
  std::vector<SampleWork> samples(batch.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(batch.size()); ++i) {
    samples[i] = critic_sample(batch[i], params, discount);
  }
  return reduce_samples(samples, batch, params);
}

CriticLossResult critic_loss_serial(std::span<const Transition> batch,
                                    const CriticParams& params, double discount) {
  if (batch.empty()) throw std::invalid_argument("critic_loss: empty batch");
  std::vector<SampleWork> samples(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    samples[i] = critic_sample(batch[i], params, discount);
  }
  return reduce_samples(samples, batch, params);
}

void soft_update(CriticParams& params) {
  const double rho = params.soft_update_rate;
  for (std::size_t l = 0; l < params.online.weights.size(); ++l) {
    params.target.weights[l] =
        rho * params.online.weights[l] + (1.0 - rho) * params.target.weights[l];
    params.target.biases[l] =
        rho * params.online.biases[l] + (1.0 - rho) * params.target.biases[l];
  }
}

}  // namespace qprl::rl
