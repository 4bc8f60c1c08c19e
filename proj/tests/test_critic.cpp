#include <doctest.h>

#include <cmath>

#include "qprl/dp/quantile_ops.hpp"
#include "qprl/math/optimizer.hpp"
#include "qprl/rl/critic.hpp"

using namespace qprl;
using namespace qprl::rl;

namespace {

CriticParams small_critic(int input_dim, const dp::QuantileGrid& grid,
                          double order_penalty, std::uint64_t seed,
                          double weight_decay = 0.0) {
  math::Rng rng(seed);
  CriticParams params = CriticParams::make(input_dim, {8}, grid, order_penalty,
                                           0.01, weight_decay, rng);
  return params;
}

Transition make_transition(const Eigen::VectorXd& s, const Eigen::VectorXd& next,
                           double reward, bool terminal, double weight = 1.0) {
  Transition t;
  t.features = s;
  t.next_features = next;
  t.reward = reward;
  t.terminal = terminal;
  t.weight = weight;
  return t;
}

double batch_loss_value(const std::vector<Transition>& batch,
                        const CriticParams& params, double discount) {
  return critic_loss(batch, params, discount).loss;
}

}  // namespace

TEST_CASE("value vector basics") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 5, 0.5);
  CriticParams params = small_critic(3, grid, 5.0, 2);

  SUBCASE("zero network maps to the zero vector") {
    for (auto& w : params.online.weights) w.setZero();
    for (auto& b : params.online.biases) b.setZero();
    CHECK(value_vector(params.online, Eigen::VectorXd::Ones(3)).norm() == 0.0);
  }

  SUBCASE("evaluation is deterministic") {
    const Eigen::VectorXd x = Eigen::VectorXd::Random(3);
    CHECK((value_vector(params.online, x) - value_vector(params.online, x))
              .norm() == 0.0);
  }
}

TEST_CASE("td errors") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 3, 0.5);
  CriticParams params = small_critic(2, grid, 5.0, 3);
  params.td_scale = 10.0;

  SUBCASE("terminal transitions drop the bootstrap") {
    for (auto& w : params.online.weights) w.setZero();
    for (auto& b : params.online.biases) b.setZero();
    const Transition t = make_transition(Eigen::VectorXd::Zero(2),
                                         Eigen::VectorXd::Zero(2), 0.7, true);
    const Eigen::VectorXd delta = td_errors(t, params, 0.9);
    for (int j = 0; j < 3; ++j) CHECK(delta(j) == doctest::Approx(7.0));
  }

  SUBCASE("self-transition with zero reward gives (beta - 1) V scale") {
    params.target = params.online;  // identical nets
    const Eigen::VectorXd s = Eigen::VectorXd::Ones(2);
    const Transition t = make_transition(s, s, 0.0, false);
    const Eigen::VectorXd v = value_vector(params.online, s);
    const Eigen::VectorXd delta = td_errors(t, params, 0.9);
    for (int j = 0; j < 3; ++j) {
      CHECK(delta(j) == doctest::Approx((0.9 - 1.0) * v(j) * 10.0));
    }
  }

  SUBCASE("matches independent composition of forward passes") {
    math::Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd s(2), next(2);
      for (int i = 0; i < 2; ++i) {
        s(i) = rng.uniform(-1.0, 1.0);
        next(i) = rng.uniform(-1.0, 1.0);
      }
      const double reward = rng.uniform(-1.0, 1.0);
      const Transition t = make_transition(s, next, reward, false);
      const Eigen::VectorXd delta = td_errors(t, params, 0.95);
      const Eigen::VectorXd online = value_vector(params.online, s);
      const Eigen::VectorXd target = value_vector(params.target, next);
      for (int j = 0; j < 3; ++j) {
        CHECK(delta(j) ==
              doctest::Approx((reward + 0.95 * target(j) - online(j)) * 10.0));
      }
    }
  }
}

TEST_CASE("critic loss structure") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.25, 0.75, 2, 0.25);

  SUBCASE("perfect monotone critic has zero loss") {
    CriticParams params = small_critic(1, grid, 5.0, 7);
    for (auto& w : params.online.weights) w.setZero();
    for (auto& b : params.online.biases) b.setZero();
    params.target = params.online;
    const std::vector<Transition> batch = {
        make_transition(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1), 0.0,
                        true)};
    CHECK(batch_loss_value(batch, params, 0.9) == 0.0);
  }

  SUBCASE("a unit head inversion with zero TD error is charged lambda") {
    // linear single-layer critic, feature dim 1: V_j(x) = w_j x.
    // With x' = x1/beta ... pick x1 = beta * x2 so delta_j = 0 for any w.
    const double beta = 0.5;
    CriticParams params = small_critic(1, grid, 5.0, 11);
    params.online.weights = {Eigen::MatrixXd(2, 1)};
    params.online.weights[0] << 3.0, 2.0;  // V_1(1) = V_2(1) + 1, inverted order
    params.online.biases = {Eigen::VectorXd::Zero(2)};
    params.target = params.online;
    params.td_scale = 1.0;

    Eigen::VectorXd s(1), next(1);
    s << 1.0;
    next << 2.0;  // beta * next = s, so r + beta V(next) - V(s) = 0 per head
    const std::vector<Transition> batch = {make_transition(s, next, 0.0, false)};
    CHECK(batch_loss_value(batch, params, beta) == doctest::Approx(5.0 * 1.0));
  }

  SUBCASE("uniform sample weights reproduce the unweighted mean") {
    CriticParams params = small_critic(2, grid, 5.0, 13);
    math::Rng rng(17);
    std::vector<Transition> unweighted, weighted;
    for (int i = 0; i < 6; ++i) {
      Eigen::VectorXd s = Eigen::VectorXd::Random(2);
      Eigen::VectorXd n = Eigen::VectorXd::Random(2);
      const double r = rng.uniform(-1.0, 1.0);
      unweighted.push_back(make_transition(s, n, r, false, 1.0));
      weighted.push_back(make_transition(s, n, r, false, 3.7));
    }
    CHECK(batch_loss_value(unweighted, params, 0.9) ==
          doctest::Approx(batch_loss_value(weighted, params, 0.9)));
  }

  SUBCASE("all-zero weights raise a degenerate-batch error") {
    CriticParams params = small_critic(2, grid, 5.0, 19);
    const std::vector<Transition> batch = {make_transition(
        Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 0.0, false, 0.0)};
    CHECK_THROWS_AS(critic_loss(batch, params, 0.9), std::invalid_argument);
  }

  SUBCASE("parallel batch loss equals the serial reference bitwise") {
    CriticParams params = small_critic(3, grid, 5.0, 23);
    math::Rng rng(29);
    std::vector<Transition> batch;
    for (int i = 0; i < 64; ++i) {
      Eigen::VectorXd s = Eigen::VectorXd::Random(3);
      Eigen::VectorXd n = Eigen::VectorXd::Random(3);
      batch.push_back(
          make_transition(s, n, rng.uniform(-1.0, 1.0), i % 7 == 0,
                          rng.uniform(0.1, 2.0)));
    }
    const CriticLossResult parallel = critic_loss(batch, params, 0.9);
    const CriticLossResult serial = critic_loss_serial(batch, params, 0.9);
    CHECK(parallel.loss == serial.loss);
    for (std::size_t l = 0; l < parallel.grads.weights.size(); ++l) {
      CHECK((parallel.grads.weights[l] - serial.grads.weights[l]).norm() == 0.0);
    }
  }
}

TEST_CASE("pinball gradient sign convention on the heads") {
  // single head, single sample: nudging the head value changes the loss
  // by -tau (delta > 0) or +(1 - tau) (delta < 0)
  const dp::QuantileGrid grid{{0.3}, 0};
  CriticParams params = small_critic(1, grid, 0.0, 31);
  params.online.weights = {Eigen::MatrixXd::Zero(1, 1)};
  params.online.biases = {Eigen::VectorXd::Zero(1)};
  params.target = params.online;
  params.td_scale = 1.0;

  const Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
  const double eps = 1e-6;
  for (double reward : {0.8, -0.8}) {
    const std::vector<Transition> batch = {
        make_transition(s, s, reward, true)};
    const double base = batch_loss_value(batch, params, 0.9);
    CriticParams bumped = params;
    bumped.online.biases[0](0) += eps;
    const double up = batch_loss_value(batch, bumped, 0.9);
    const double slope = (up - base) / eps;
    if (reward > 0.0) {
      CHECK(slope == doctest::Approx(-0.3).epsilon(1e-6));  // delta stays > 0
    } else {
      CHECK(slope == doctest::Approx(0.7).epsilon(1e-6));  // delta stays < 0
    }
  }
}

TEST_CASE("order penalty is zero iff heads are monotone") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 4, 0.9);
  math::Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    CriticParams with_penalty = small_critic(2, grid, 7.0, 100 + trial);
    CriticParams without = with_penalty;
    without.order_penalty = 0.0;
    std::vector<Transition> batch;
    bool monotone = true;
    for (int i = 0; i < 5; ++i) {
      Eigen::VectorXd s = Eigen::VectorXd::Random(2);
      batch.push_back(make_transition(s, s, rng.uniform(-1.0, 1.0), true));
      const Eigen::VectorXd heads = value_vector(with_penalty.online, s);
      for (int j = 0; j + 1 < 4; ++j) {
        if (heads(j) > heads(j + 1)) monotone = false;
      }
    }
    const double gap = batch_loss_value(batch, with_penalty, 0.9) -
                       batch_loss_value(batch, without, 0.9);
    if (monotone) {
      CHECK(gap == 0.0);
    } else {
      CHECK(gap > 0.0);
    }
  }
}

TEST_CASE("critic gradients match central finite differences") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 5, 0.1);
  math::Rng rng(41);
  CriticParams params = small_critic(3, grid, 5.0, 43, 1e-3);
  params.td_scale = 10.0;

  std::vector<Transition> batch;
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd s(3), n(3);
    for (int k = 0; k < 3; ++k) {
      s(k) = rng.uniform(-1.0, 1.0);
      n(k) = rng.uniform(-1.0, 1.0);
    }
    batch.push_back(make_transition(s, n, rng.uniform(-1.0, 1.0), i % 3 == 0,
                                    rng.uniform(0.5, 1.5)));
  }
  const CriticLossResult result = critic_loss(batch, params, 0.9);
  const double step = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 100; ++trial) {
    const int layer = trial % params.online.num_layers();
    const int row = (trial / 2) % params.online.weights[layer].rows();
    const int col = (trial / 3) % params.online.weights[layer].cols();
    CriticParams bumped = params;
    bumped.online.weights[layer](row, col) += step;
    const double up = critic_loss(batch, bumped, 0.9).loss;
    bumped.online.weights[layer](row, col) -= 2.0 * step;
    const double down = critic_loss(batch, bumped, 0.9).loss;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = result.grads.weights[layer](row, col);
    // piecewise-linear loss: skip entries whose secant straddles a kink
    if (std::abs(up + down - 2.0 * critic_loss(batch, params, 0.9).loss) >
        1e-10 * std::max(1.0, std::abs(up))) {
      continue;
    }
    ++checked;
    CHECK(std::abs(numeric - analytic) <=
          1e-4 * std::max(1.0, std::abs(numeric)));
  }
  CHECK(checked >= 50);
}

TEST_CASE("soft update blends online into target") {
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.1, 0.9, 3, 0.5);
  CriticParams params = small_critic(2, grid, 5.0, 47);

  SUBCASE("rho = 1 copies") {
    params.soft_update_rate = 1.0;
    soft_update(params);
    for (std::size_t l = 0; l < params.online.weights.size(); ++l) {
      CHECK((params.target.weights[l] - params.online.weights[l]).norm() == 0.0);
    }
  }

  SUBCASE("scalar case: 0.01 of the way per update") {
    params.soft_update_rate = 0.01;
    params.online.weights = {Eigen::MatrixXd::Constant(3, 2, 1.0)};
    params.online.biases = {Eigen::VectorXd::Zero(3)};
    params.target.weights = {Eigen::MatrixXd::Zero(3, 2)};
    params.target.biases = {Eigen::VectorXd::Zero(3)};
    soft_update(params);
    CHECK(params.target.weights[0](0, 0) == doctest::Approx(0.01));
  }

  SUBCASE("repeated updates converge geometrically") {
    params.soft_update_rate = 0.25;
    params.online.weights = {Eigen::MatrixXd::Constant(1, 1, 2.0)};
    params.online.biases = {Eigen::VectorXd::Zero(1)};
    params.target.weights = {Eigen::MatrixXd::Zero(1, 1)};
    params.target.biases = {Eigen::VectorXd::Zero(1)};
    double expected_gap = 2.0;
    for (int i = 0; i < 10; ++i) {
      soft_update(params);
      expected_gap *= 0.75;
      CHECK(2.0 - params.target.weights[0](0, 0) == doctest::Approx(expected_gap));
    }
  }
}

TEST_CASE("linear critic on one-hot features reaches the policy fixed point") {
  // realizable class: tabular MDP, one-hot features, single linear layer
  math::Rng rng(53);
  dp::TabularMdp mdp = dp::TabularMdp::random(4, 2, 0.9, rng);
  const dp::PolicyMatrix policy =
      dp::PolicyMatrix::Constant(4, 2, 0.5);
  const dp::QuantileGrid grid = dp::QuantileGrid::linspace(0.2, 0.8, 3, 0.5);

  // per-head fixed points via exact policy value iteration
  Eigen::MatrixXd fixed(4, 3);
  for (int j = 0; j < 3; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    for (int sweep = 0; sweep < 3000; ++sweep) {
      Eigen::VectorXd next = policy_operator(mdp, v, policy, grid.levels[j]);
      if ((next - v).cwiseAbs().maxCoeff() < 1e-13) {
        v = next;
        break;
      }
      v = next;
    }
    fixed.col(j) = v;
  }

  CriticParams critic;
  critic.grid = grid;
  math::Rng init(59);
  critic.online = math::MlpParams::make({4, 3}, init, 0.0);
  critic.target = critic.online;
  critic.order_penalty = 0.0;
  critic.soft_update_rate = 0.05;
  critic.td_scale = 1.0;

  math::OptimizerState opt{0.2, 0.01, 1.0, 60000, 0};
  math::Rng sampler(61);
  for (int step = 0; step < 60000; ++step) {
    const int s = static_cast<int>(sampler.uniform() * 4.0);
    const int a = sampler.uniform() < 0.5 ? 0 : 1;
    const double u = sampler.uniform();
    double cum = 0.0;
    int next = 3;
    for (int cand = 0; cand < 4; ++cand) {
      cum += mdp.transition[a](s, cand);
      if (u <= cum) {
        next = cand;
        break;
      }
    }
    Transition t;
    t.features = Eigen::VectorXd::Zero(4);
    t.features(s) = 1.0;
    t.next_features = Eigen::VectorXd::Zero(4);
    t.next_features(next) = 1.0;
    t.reward = mdp.reward(s, a);
    t.terminal = false;
    const CriticLossResult loss = critic_loss(std::span(&t, 1), critic, 0.9);
    math::apply_sgd(critic.online, loss.grads, opt);
    soft_update(critic);
  }

  for (int s = 0; s < 4; ++s) {
    Eigen::VectorXd features = Eigen::VectorXd::Zero(4);
    features(s) = 1.0;
    const Eigen::VectorXd heads = value_vector(critic.online, features);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(heads(j) - fixed(s, j)) < 0.25);
    }
  }
}
