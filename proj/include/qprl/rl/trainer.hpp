#pragma once

#include <array>
#include <optional>
#include <utility>

#include "qprl/env/rs_var.hpp"
#include "qprl/rl/actor.hpp"
#include "qprl/rl/checkpoint.hpp"
#include "qprl/rl/critic.hpp"

namespace qprl::rl {

struct TrainConfig {
  double discount = 0.99;
  int episodes = 50;
  int rollouts_per_update = 1;  // episodes collected into one episodic batch
  bool update_per_step = false; // per-step updates instead of episodic batches
  int min_epochs = 15;
  int eval_every = 3;
  int patience = 2;

  double critic_lr_start = 0.01;
  double critic_lr_end = 0.001;
  double critic_decay = 1.5;
  double actor_lr_start = 0.005;
  double actor_lr_end = 0.001;
  double actor_decay = 1.5;
  double weight_decay = 1e-4;

  double soft_update_rate = 0.01;  // rho
  double order_penalty = 5.0;      // lambda_omega
  double entropy_coef = 0.0;       // lambda_theta
  double sigma = 0.5;
  /// episodes with critic-only updates before the actor starts moving;
  /// approximates the two-timescale limit where the actor faces a
  /// settled critic
  int critic_warmup = 0;
  double td_scale = 10.0;
  bool actor_uses_scaled_td = true;
  bool literal_actor_sign = false;
  /// true: coefficient psi_tau(delta)*|delta| (the displayed training
  /// loss); false: pure psi_tau(delta) (the likelihood-ratio gradient of
  /// the quantile objective). The magnitude weighting is variance-seeking
  /// at low tau on symmetric reward laws, so the exact form is the
  /// default.
  bool actor_weight_by_delta = false;

  dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 9, 0.5);
  std::vector<int> hidden = {16, 16};
  PolicyHead head = PolicyHead::GaussianSoftmax;

  // model-based (regime enumeration) settings
  int wealth_grid_points = 5;   // per prev-weight coordinate
  int return_grid_points = 5;   // per return coordinate
  int inner_passes = 1;         // gradient steps per epoch over the buffer
  double sim_cost_rate = 1e-3;

  void validate() const;

  /// Table-C.1 defaults for the daily-data environment.
  static TrainConfig historical_defaults(double tau);
  /// Table-F.1 defaults for the simulated RS-VAR testbed.
  static TrainConfig simulated_defaults(double tau);
};

struct EpisodeRecord {
  int episode = 0;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  bool evaluated = false;
  double val_critic_loss = 0.0;
  double val_actor_loss = 0.0;
};

struct RunHistory {
  std::vector<EpisodeRecord> episodes;
  int best_episode = -1;
  double best_val_stat = 0.0;
  bool early_stopped = false;
};

struct TrainResult {
  ActorParams actor;
  CriticParams critic;
  RunHistory history;
  bool diverged = false;
};

/// Episodic on-policy training: roll out with the current policy, apply
/// the critic then the actor update on the episode batch, soft-update
/// the target, and early-stop on the validation statistic after
/// min_epochs. Returns the best-validation checkpoint parameters (the
/// final ones when no evaluation ran). A non-finite loss aborts with
/// diverged=true and the last finite parameters.
TrainResult train(env::Environment& environment, env::Environment* validation,
                  const TrainConfig& config, std::uint64_t seed);

/// Model-based variant over the RS-VAR world: buffers are built by
/// sweeping a (prev-weights, returns, regime) grid, sampling one action
/// per point, enumerating every next regime with weight q = Q_{kk'} and
/// sharing the simulated return draw; losses are q-weighted and
/// self-normalized; the target critic soft-updates once per epoch.
TrainResult train_model_based(const env::RegimeVarModel& model,
                              const TrainConfig& config, std::uint64_t seed);

struct EvalResult {
  Eigen::MatrixXd weights;       // one row per step
  std::vector<double> rewards;
  std::vector<double> wealth;    // wealth level after each step
  std::vector<int> regimes;
  Eigen::VectorXd icdf_curve;    // critic heads averaged over visited states
  Eigen::MatrixXd features;      // visited state features (row per step)
};

/// Greedy-mean evaluation pass over one episode.
EvalResult evaluate(const ActorParams& actor, const CriticParams& critic,
                    env::Environment& environment, std::uint64_t seed);

struct SplitRanges {
  std::pair<int, int> train;
  std::pair<int, int> validation;
  std::pair<int, int> test;
};

/// Contiguous chronological split of n rows; fractions must sum to <= 1
/// and leave every used segment nonempty.
SplitRanges split_data(int rows, double train_fraction, double validation_fraction);

}  // namespace qprl::rl
