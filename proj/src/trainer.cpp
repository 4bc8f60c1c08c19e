#include "qprl/rl/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "qprl/math/optimizer.hpp"

namespace qprl::rl {

namespace {

constexpr std::uint64_t kRolloutStream = 0x01;
constexpr std::uint64_t kInitStream = 0x02;
constexpr std::uint64_t kValidationStream = 0x03;
constexpr std::uint64_t kEvalStream = 0x04;
constexpr std::uint64_t kBufferStream = 0x05;

struct Rollout {
  std::vector<Transition> transitions;
};

Rollout collect_episodes(env::Environment& environment, const ActorParams& actor,
                         int episodes, math::Rng& rng) {
  Rollout rollout;
  for (int e = 0; e < episodes; ++e) {
    env::MarketState state = environment.reset(rng);
    for (int t = 0; t < environment.horizon(); ++t) {
      Transition transition;
      transition.features = environment.features(state);
      transition.value_scale = environment.value_scale(state);
      ActionSample sample = act(actor, transition.features, rng);
      env::StepOutcome outcome = environment.step(state, sample.action, rng);
      transition.next_features = environment.features(outcome.next);
      transition.next_value_scale = environment.value_scale(outcome.next);
      transition.action = sample.action.weights;
      transition.raw = sample.raw;
      transition.log_prob = sample.log_prob;
      transition.reward = outcome.reward;
      transition.terminal = outcome.terminal;
      rollout.transitions.push_back(std::move(transition));
      state = std::move(outcome.next);
      if (outcome.terminal) break;
    }
  }
  return rollout;
}

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  bool finite = true;
};

std::vector<double> actor_coefficients(const std::vector<double>& scaled_td,
                                       const CriticParams& critic,
                                       const TrainConfig& config) {
  std::vector<double> deltas = scaled_td;
  if (!config.actor_weight_by_delta) {
    // pure score-function coefficient psi_tau(delta): pass the sign so
    // the delta-weighted surrogate machinery reduces to it
    for (double& d : deltas) d = d >= 0.0 ? 1.0 : -1.0;
  } else if (!config.actor_uses_scaled_td && critic.td_scale != 0.0) {
    for (double& d : deltas) d /= critic.td_scale;
  }
  return deltas;
}

UpdateStats apply_updates(std::span<const Transition> batch, ActorParams& actor,
                          CriticParams& critic, const TrainConfig& config,
                          math::OptimizerState& critic_opt,
                          math::OptimizerState& actor_opt, bool freeze_actor) {
  CriticLossResult closs = critic_loss(batch, critic, config.discount);
  const std::vector<double> deltas =
      actor_coefficients(closs.target_td, critic, config);
  ActorLossResult aloss = actor_loss(batch, deltas, actor, config.grid.target(),
                                     config.literal_actor_sign);

  UpdateStats stats{closs.loss, aloss.loss, true};
  if (!std::isfinite(closs.loss) || !std::isfinite(aloss.loss)) {
    stats.finite = false;
    return stats;
  }
  math::apply_sgd(critic.online, closs.grads, critic_opt);
  if (!freeze_actor) {
    math::apply_sgd(actor.net, aloss.grads, actor_opt);
  }
  stats.finite = critic.online.finite() && actor.net.finite();
  return stats;
}

std::pair<double, double> validation_losses(env::Environment& environment,
                                            const ActorParams& actor,
                                            const CriticParams& critic,
                                            const TrainConfig& config,
                                            std::uint64_t seed) {
  math::Rng rng = math::Rng(seed).spawn(kValidationStream);
  Rollout rollout =
      collect_episodes(environment, actor, config.rollouts_per_update, rng);
  CriticLossResult closs = critic_loss(rollout.transitions, critic, config.discount);
  const std::vector<double> deltas =
      actor_coefficients(closs.target_td, critic, config);
  ActorLossResult aloss =
      actor_loss(rollout.transitions, deltas, actor, config.grid.target(),
                 config.literal_actor_sign);
  return {closs.loss, aloss.loss};
}

}  // namespace

void TrainConfig::validate() const {
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("train config: discount must lie in (0, 1)");
  }
  if (episodes < min_epochs) {
    throw std::invalid_argument("train config: episodes must be >= min_epochs");
  }
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (eval_every < 1 || rollouts_per_update < 1 || inner_passes < 1) {
    throw std::invalid_argument("train config: bad loop sizes");
  }
  grid.validate();
}

TrainConfig TrainConfig::historical_defaults(double tau) {
  TrainConfig config;
  config.grid = dp::QuantileGrid::linspace(0.1, 0.9, 9, tau);
  config.head = PolicyHead::GaussianSoftmax;
  return config;
}

TrainConfig TrainConfig::simulated_defaults(double tau) {
  TrainConfig config;
  config.discount = 0.96;
  config.episodes = 10;
  config.min_epochs = 1;
  config.grid = dp::QuantileGrid::linspace(0.1, 0.9, 9, tau);
  config.hidden = {32, 32};
  config.head = PolicyHead::Dirichlet;
  config.td_scale = 1.0;
  config.sim_cost_rate = 1e-3;
  return config;
}

TrainResult train(env::Environment& environment, env::Environment* validation,
                  const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  math::Rng init_rng = math::Rng(seed).spawn(kInitStream);
  math::Rng rollout_rng = math::Rng(seed).spawn(kRolloutStream);

  TrainResult result;
  result.critic = CriticParams::make(environment.feature_dim(), config.hidden,
                                     config.grid, config.order_penalty,
                                     config.soft_update_rate, config.weight_decay,
                                     init_rng);
  result.critic.td_scale = config.td_scale;
  result.actor = ActorParams::make(environment.feature_dim(), config.hidden,
                                   environment.num_assets(), config.head,
                                   config.sigma, config.weight_decay, init_rng);
  result.actor.entropy_coef = config.entropy_coef;

  const long long updates_per_episode =
      config.update_per_step
          ? static_cast<long long>(environment.horizon()) * config.rollouts_per_update
          : 1;
  math::OptimizerState critic_opt{config.critic_lr_start, config.critic_lr_end,
                                  config.critic_decay,
                                  config.episodes * updates_per_episode, 0};
  math::OptimizerState actor_opt{config.actor_lr_start, config.actor_lr_end,
                                 config.actor_decay,
                                 config.episodes * updates_per_episode, 0};

  ActorParams best_actor = result.actor;
  CriticParams best_critic = result.critic;
  double best_stat = std::numeric_limits<double>::infinity();
  int evals_since_best = 0;
  bool have_best = false;

  for (int episode = 1; episode <= config.episodes; ++episode) {
    Rollout rollout = collect_episodes(environment, result.actor,
                                       config.rollouts_per_update, rollout_rng);
    ActorParams last_actor = result.actor;
    CriticParams last_critic = result.critic;

    UpdateStats stats;
    const bool freeze_actor = episode <= config.critic_warmup;
    if (config.update_per_step) {
      for (const Transition& transition : rollout.transitions) {
        stats = apply_updates(std::span(&transition, 1), result.actor, result.critic,
                              config, critic_opt, actor_opt, freeze_actor);
        if (!stats.finite) break;
      }
    } else {
      stats = apply_updates(rollout.transitions, result.actor, result.critic, config,
                            critic_opt, actor_opt, freeze_actor);
    }
    if (!stats.finite) {
      result.actor = std::move(last_actor);
      result.critic = std::move(last_critic);
      result.diverged = true;
      break;
    }
    soft_update(result.critic);

    EpisodeRecord record;
    record.episode = episode;
    record.critic_loss = stats.critic_loss;
    record.actor_loss = stats.actor_loss;

    if (episode % config.eval_every == 0) {
      env::Environment& val_env = validation ? *validation : environment;
      auto [val_critic, val_actor] =
          validation_losses(val_env, result.actor, result.critic, config, seed);
      record.evaluated = true;
      record.val_critic_loss = val_critic;
      record.val_actor_loss = val_actor;
      const double stat = val_critic + std::abs(val_actor);
      if (!have_best || stat < best_stat) {
        best_stat = stat;
        best_actor = result.actor;
        best_critic = result.critic;
        result.history.best_episode = episode;
        evals_since_best = 0;
        have_best = true;
      } else {
        ++evals_since_best;
      }
      result.history.episodes.push_back(record);
      if (episode >= config.min_epochs && evals_since_best >= config.patience) {
        result.history.early_stopped = true;
        break;
      }
    } else {
      result.history.episodes.push_back(record);
    }
  }

  if (have_best && !result.diverged) {
    result.actor = std::move(best_actor);
    result.critic = std::move(best_critic);
    result.history.best_val_stat = best_stat;
  }
  return result;
}

namespace {

/// All vectors with `coords` nonnegative entries on a (points-1)-step
/// simplex lattice, i.e. compositions of points-1.
void simplex_lattice(int coords, int points, Eigen::VectorXd prefix, int remaining,
                     int index, std::vector<Eigen::VectorXd>& out) {
  if (index == coords - 1) {
    prefix(index) = static_cast<double>(remaining) / (points - 1);
    out.push_back(prefix);
    return;
  }
  for (int units = 0; units <= remaining; ++units) {
    prefix(index) = static_cast<double>(units) / (points - 1);
    simplex_lattice(coords, points, prefix, remaining - units, index + 1, out);
  }
}

std::vector<Eigen::VectorXd> simplex_grid(int coords, int points) {
  std::vector<Eigen::VectorXd> out;
  simplex_lattice(coords, points, Eigen::VectorXd::Zero(coords), points - 1, 0, out);
  return out;
}

std::vector<Eigen::VectorXd> return_grid(const env::RegimeVarModel& model,
                                         int points) {
  const int n = model.num_assets;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, 1e300);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, -1e300);
  for (int k = 0; k < model.num_regimes; ++k) {
    const Eigen::VectorXd level = model.steady_returns(k);
    for (int i = 0; i < n; ++i) {
      const double sd = std::sqrt(model.sigma[k](i, i));
      lo(i) = std::min(lo(i), level(i) - 2.0 * sd);
      hi(i) = std::max(hi(i), level(i) + 2.0 * sd);
    }
  }
  std::vector<std::vector<double>> axes(n);
  for (int i = 0; i < n; ++i) {
    for (int g = 0; g < points; ++g) {
      axes[i].push_back(points == 1 ? 0.5 * (lo(i) + hi(i))
                                    : lo(i) + (hi(i) - lo(i)) * g / (points - 1));
    }
  }
  std::vector<Eigen::VectorXd> grid;
  std::vector<int> digits(n, 0);
  for (;;) {
    Eigen::VectorXd point(n);
    for (int i = 0; i < n; ++i) point(i) = axes[i][digits[i]];
    grid.push_back(std::move(point));
    int carry = 0;
    while (carry < n && ++digits[carry] == points) digits[carry++] = 0;
    if (carry == n) break;
  }
  return grid;
}

}  // namespace

TrainResult train_model_based(const env::RegimeVarModel& model,
                              const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  model.validate();
  env::RsVarEnv environment(model, config.sim_cost_rate, 2);

  math::Rng init_rng = math::Rng(seed).spawn(kInitStream);
  TrainResult result;
  result.critic = CriticParams::make(environment.feature_dim(), config.hidden,
                                     config.grid, config.order_penalty,
                                     config.soft_update_rate, config.weight_decay,
                                     init_rng);
  result.critic.td_scale = config.td_scale;
  result.actor = ActorParams::make(environment.feature_dim(), config.hidden,
                                   environment.num_assets(), PolicyHead::Dirichlet,
                                   config.sigma, config.weight_decay, init_rng);
  result.actor.entropy_coef = config.entropy_coef;

  const auto weight_points = simplex_grid(environment.num_assets(),
                                          config.wealth_grid_points);
  const auto return_points = return_grid(model, config.return_grid_points);
  const long num_points = static_cast<long>(weight_points.size()) *
                          static_cast<long>(return_points.size()) *
                          model.num_regimes;

  math::OptimizerState critic_opt{config.critic_lr_start, config.critic_lr_end,
                                  config.critic_decay,
                                  static_cast<long long>(config.episodes) *
                                      config.inner_passes,
                                  0};
  math::OptimizerState actor_opt{config.actor_lr_start, config.actor_lr_end,
                                 config.actor_decay,
                                 static_cast<long long>(config.episodes) *
                                     config.inner_passes,
                                 0};

  std::vector<Transition> buffer(num_points * model.num_regimes);
  for (int epoch = 1; epoch <= config.episodes; ++epoch) {
    // grid sweep; per-point substreams keep the build deterministic for
    // any thread count
    const ActorParams actor_snapshot = result.actor;
#pragma omp parallel for schedule(static)
    for (long point = 0; point < num_points; ++point) {
      const long wi = point % static_cast<long>(weight_points.size());
      const long rest = point / static_cast<long>(weight_points.size());
      const long ri = rest % static_cast<long>(return_points.size());
      const int k = static_cast<int>(rest / static_cast<long>(return_points.size()));

      env::MarketState state;
      state.prev_weights = weight_points[wi];
      state.exogenous = return_points[ri];
      state.regime = k;
      state.wealth = 1.0;

      math::Rng point_rng = math::Rng(seed).spawn(
          kBufferStream + static_cast<std::uint64_t>(epoch) * num_points + point);
      const Eigen::VectorXd features = environment.features(state);
      ActionSample sample = act(actor_snapshot, features, point_rng);
      auto [next_returns, sampled_regime] =
          env::rs_var_step(model, state.exogenous, k, point_rng);
      (void)sampled_regime;  // enumeration replaces the sampled draw
      const double reward =
          environment.reward_for(state, sample.action.weights, next_returns);

      env::MarketState next;
      next.prev_weights = sample.action.weights;
      next.exogenous = next_returns;
      next.wealth = 1.0;
      for (int knext = 0; knext < model.num_regimes; ++knext) {
        next.regime = knext;
        Transition transition;
        transition.features = features;
        transition.next_features = environment.features(next);
        transition.action = sample.action.weights;
        transition.raw = sample.raw;
        transition.log_prob = sample.log_prob;
        transition.reward = reward;
        transition.weight = model.q(k, knext);
        transition.terminal = false;
        buffer[point * model.num_regimes + knext] = std::move(transition);
      }
    }

    EpisodeRecord record;
    record.episode = epoch;
    bool finite = true;
    for (int pass = 0; pass < config.inner_passes; ++pass) {
      UpdateStats stats = apply_updates(buffer, result.actor, result.critic, config,
                                        critic_opt, actor_opt,
                                        epoch <= config.critic_warmup);
      record.critic_loss = stats.critic_loss;
      record.actor_loss = stats.actor_loss;
      if (!stats.finite) {
        finite = false;
        break;
      }
    }
    if (!finite) {
      result.diverged = true;
      break;
    }
    soft_update(result.critic);
    result.history.episodes.push_back(record);
  }
  return result;
}

EvalResult evaluate(const ActorParams& actor, const CriticParams& critic,
                    env::Environment& environment, std::uint64_t seed) {
  math::Rng rng = math::Rng(seed).spawn(kEvalStream);
  EvalResult result;
  env::MarketState state = environment.reset(rng);
  const int horizon = environment.horizon();
  result.weights.resize(horizon, environment.num_assets());
  result.features.resize(horizon, environment.feature_dim());
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(critic.grid.size());
  int steps = 0;
  for (int t = 0; t < horizon; ++t) {
    const Eigen::VectorXd features = environment.features(state);
    env::PortfolioAction action = mean_action(actor, features);
    env::StepOutcome outcome = environment.step(state, action, rng);
    result.weights.row(steps) = action.weights;
    result.features.row(steps) = features;
    result.rewards.push_back(outcome.reward);
    result.wealth.push_back(outcome.next.wealth);
    result.regimes.push_back(state.regime);
    curve += value_vector(critic.online, features);
    ++steps;
    state = std::move(outcome.next);
    if (outcome.terminal) break;
  }
  result.weights.conservativeResize(steps, Eigen::NoChange);
  result.features.conservativeResize(steps, Eigen::NoChange);
  result.icdf_curve = curve / std::max(steps, 1);
  return result;
}

SplitRanges split_data(int rows, double train_fraction, double validation_fraction) {
  if (train_fraction < 0.0 || validation_fraction < 0.0 ||
      train_fraction + validation_fraction > 1.0 + 1e-12) {
    throw std::invalid_argument("split: fractions must be nonnegative and sum <= 1");
  }
  const int train_end = static_cast<int>(std::floor(rows * train_fraction + 1e-9));
  const int val_end = static_cast<int>(
      std::floor(rows * (train_fraction + validation_fraction) + 1e-9));
  if (train_end < 1 || train_end > rows || val_end < train_end || val_end > rows) {
    throw std::invalid_argument("split: series too short for the requested fractions");
  }
  return SplitRanges{{0, train_end}, {train_end, val_end}, {val_end, rows}};
}

}  // namespace qprl::rl
