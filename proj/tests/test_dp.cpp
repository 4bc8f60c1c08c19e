#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qprl/dp/quantile_ops.hpp"
#include "qprl/math/normal.hpp"
#include "qprl/math/rng.hpp"

using namespace qprl;
using namespace qprl::dp;

namespace {

// Test-side oracle: tau-quantile by explicit CDF walk over sorted pairs,
// written independently of discrete_quantile.
double quantile_by_enumeration(std::vector<std::pair<double, double>> atom_probs,
                               double tau) {
  std::sort(atom_probs.begin(), atom_probs.end());
  double cum = 0.0;
  for (const auto& [atom, prob] : atom_probs) {
    cum += prob;
    if (cum >= tau - 1e-12) return atom;
  }
  return atom_probs.back().first;
}

// Oracle for the policy operator: enumerate every (a, s') pair.
Eigen::VectorXd policy_backup_oracle(const TabularMdp& mdp, const Eigen::VectorXd& v,
                                     const PolicyMatrix& policy, double tau) {
  Eigen::VectorXd out(mdp.num_states);
  for (int s = 0; s < mdp.num_states; ++s) {
    std::vector<std::pair<double, double>> support;
    for (int a = 0; a < mdp.num_actions; ++a) {
      for (int next = 0; next < mdp.num_states; ++next) {
        support.push_back({mdp.reward_at(s, a, next) + mdp.discount * v(next),
                           policy(s, a) * mdp.transition[a](s, next)});
      }
    }
    out(s) = quantile_by_enumeration(support, tau);
  }
  return out;
}

PolicyMatrix uniform_policy(const TabularMdp& mdp) {
  return PolicyMatrix::Constant(mdp.num_states, mdp.num_actions,
                                1.0 / mdp.num_actions);
}

PolicyMatrix deterministic_policy(const TabularMdp& mdp,
                                  const std::vector<int>& actions) {
  PolicyMatrix p = PolicyMatrix::Zero(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) p(s, actions[s]) = 1.0;
  return p;
}

// Evaluate one deterministic stationary policy to its fixed point.
Eigen::VectorXd evaluate_policy(const TabularMdp& mdp, const std::vector<int>& actions,
                                double tau) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.num_states);
  const PolicyMatrix p = deterministic_policy(mdp, actions);
  for (int sweep = 0; sweep < 2000; ++sweep) {
    Eigen::VectorXd next = policy_operator_serial(mdp, v, p, tau);
    const double residual = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (residual < 1e-12) break;
  }
  return v;
}

}  // namespace

TEST_CASE("discrete quantile follows the inf convention") {
  const double atoms[] = {1.0, 2.0, 3.0};
  const double probs[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(discrete_quantile(atoms, probs, 0.5) == 2.0);

  const double jump_atoms[] = {0.0, 10.0};
  const double jump_probs[] = {0.7, 0.3};
  CHECK(discrete_quantile(jump_atoms, jump_probs, 0.7) == 0.0);
  CHECK(discrete_quantile(jump_atoms, jump_probs, 0.71) == 10.0);

  CHECK_THROWS_AS(discrete_quantile({}, {}, 0.5), std::domain_error);
  const double bad_probs[] = {0.5, 0.4};
  CHECK_THROWS_AS(discrete_quantile(jump_atoms, bad_probs, 0.5),
                  std::invalid_argument);
}

TEST_CASE("discrete quantile of normal samples approaches the normal quantile") {
  math::Rng rng(41);
  const int n = 10000;
  std::vector<double> atoms(n), probs(n, 1.0 / n);
  for (double& a : atoms) a = rng.normal();
  const double estimate = discrete_quantile(atoms, probs, 0.9);
  CHECK(std::abs(estimate - math::std_normal_quantile(0.9)) < 0.07);
}

TEST_CASE("policy operator") {
  math::Rng rng(43);

  SUBCASE("deterministic chain reduces to r + beta V") {
    TabularMdp mdp;
    mdp.num_states = 3;
    mdp.num_actions = 1;
    mdp.discount = 0.9;
    mdp.reward = Eigen::MatrixXd::Zero(3, 1);
    mdp.reward << 1.0, 2.0, 3.0;
    Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
    chain(0, 1) = 1.0;
    chain(1, 2) = 1.0;
    chain(2, 0) = 1.0;
    mdp.transition = {chain};
    mdp.validate();
    Eigen::VectorXd v(3);
    v << 5.0, -1.0, 2.0;
    const Eigen::VectorXd out = policy_operator(mdp, v, uniform_policy(mdp), 0.4);
    CHECK(out(0) == doctest::Approx(1.0 + 0.9 * -1.0));
    CHECK(out(1) == doctest::Approx(2.0 + 0.9 * 2.0));
    CHECK(out(2) == doctest::Approx(3.0 + 0.9 * 5.0));
  }

  SUBCASE("beta = 0 collapses to the reward quantile") {
    TabularMdp mdp = TabularMdp::random(4, 3, 0.0, rng);
    Eigen::VectorXd v = Eigen::VectorXd::Random(4);
    const PolicyMatrix policy = uniform_policy(mdp);
    const Eigen::VectorXd out = policy_operator(mdp, v, policy, 0.3);
    for (int s = 0; s < 4; ++s) {
      std::vector<std::pair<double, double>> support;
      for (int a = 0; a < 3; ++a) support.push_back({mdp.reward(s, a), 1.0 / 3});
      CHECK(out(s) == doctest::Approx(quantile_by_enumeration(support, 0.3)));
    }
  }

  SUBCASE("random MDPs match the full-enumeration oracle") {
    for (int trial = 0; trial < 30; ++trial) {
      TabularMdp mdp = TabularMdp::random(5, 3, 0.9, rng);
      Eigen::VectorXd v(5);
      for (int i = 0; i < 5; ++i) v(i) = rng.uniform(-2.0, 2.0);
      PolicyMatrix policy(5, 3);
      for (int s = 0; s < 5; ++s) {
        double total = 0.0;
        for (int a = 0; a < 3; ++a) {
          policy(s, a) = rng.uniform();
          total += policy(s, a);
        }
        policy.row(s) /= total;
      }
      const double tau = rng.uniform(0.05, 0.95);
      const Eigen::VectorXd fast = policy_operator(mdp, v, policy, tau);
      const Eigen::VectorXd oracle = policy_backup_oracle(mdp, v, policy, tau);
      CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-12);
      // parallel kernel must agree with the serial reference bitwise
      const Eigen::VectorXd serial = policy_operator_serial(mdp, v, policy, tau);
      CHECK((fast - serial).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("optimality operator") {
  math::Rng rng(47);

  SUBCASE("single action equals the policy operator") {
    TabularMdp mdp = TabularMdp::random(6, 1, 0.8, rng);
    Eigen::VectorXd v = Eigen::VectorXd::Random(6);
    const GreedyBackup greedy = optimality_operator(mdp, v, 0.2);
    const Eigen::VectorXd via_policy =
        policy_operator(mdp, v, uniform_policy(mdp), 0.2);
    CHECK((greedy.values - via_policy).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("stochastically dominating action wins for every tau") {
    TabularMdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 2;
    mdp.discount = 0.0;
    mdp.reward.resize(2, 2);
    mdp.reward << 1.0, 0.0, 1.0, 0.0;  // action 0 dominates
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    mdp.transition = {p, p};
    mdp.validate();
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const GreedyBackup greedy = optimality_operator(mdp, Eigen::VectorXd::Zero(2), tau);
      CHECK(greedy.greedy_actions[0] == 0);
      CHECK(greedy.greedy_actions[1] == 0);
    }
  }

  SUBCASE("value iteration fixed point matches exhaustive policy enumeration") {
    for (int trial = 0; trial < 3; ++trial) {
      TabularMdp mdp = TabularMdp::random(4, 3, 0.85, rng);
      const double tau = 0.35;
      const ValueIterationResult vi = value_iteration(mdp, tau, 1e-11, 4000);
      REQUIRE(vi.converged);

      // enumerate all A^S deterministic stationary policies
      Eigen::VectorXd best = Eigen::VectorXd::Constant(4, -1e300);
      std::vector<int> actions(4, 0);
      const long total = static_cast<long>(std::pow(3, 4));
      for (long code = 0; code < total; ++code) {
        long rest = code;
        for (int s = 0; s < 4; ++s) {
          actions[s] = static_cast<int>(rest % 3);
          rest /= 3;
        }
        const Eigen::VectorXd value = evaluate_policy(mdp, actions, tau);
        best = best.cwiseMax(value);
      }
      CHECK((vi.values - best).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("value iteration diagnostics") {
  math::Rng rng(53);

  SUBCASE("beta = 0 converges in one residual-zero sweep") {
    TabularMdp mdp = TabularMdp::random(5, 2, 0.0, rng);
    const ValueIterationResult vi = value_iteration(mdp, 0.5, 1e-10, 100);
    CHECK(vi.converged);
    CHECK(vi.sweeps <= 2);
  }

  SUBCASE("residual ratios respect the beta contraction") {
    // tol floors the ratio denominators; far below it, rounding noise in
    // the backups (relative to the ~1/(1-beta) value scale) would
    // swamp the 1e-9 slack
    for (double beta : {0.5, 0.9}) {
      TabularMdp mdp = TabularMdp::random(8, 3, beta, rng);
      const ValueIterationResult vi = value_iteration(mdp, 0.3, 1e-5, 5000);
      REQUIRE(vi.converged);
      for (std::size_t k = 1; k < vi.residuals.size(); ++k) {
        if (vi.residuals[k - 1] == 0.0) break;
        CHECK(vi.residuals[k] / vi.residuals[k - 1] <= beta + 1e-9);
      }
    }
  }

  SUBCASE("nonconvergence reports instead of throwing") {
    TabularMdp mdp = TabularMdp::random(6, 2, 0.95, rng);
    const ValueIterationResult vi = value_iteration(mdp, 0.5, 1e-14, 3);
    CHECK_FALSE(vi.converged);
    CHECK(vi.residuals.size() == 3);
  }

  SUBCASE("two-state coin chain matches hand algebra") {
    // One action; from either face the coin re-flips: next state is
    // heads or tails with probability 1/2. Rewards: heads 1, tails 0.
    // For tau <= 0.5 the backup picks the tails continuation branch:
    //   V(h) = 1 + b * min(V), V(t) = b * min(V)  =>  V(t) = b * V(t)
    //   => V(t) = 0, V(h) = 1.
    TabularMdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 1;
    mdp.discount = 0.9;
    mdp.reward.resize(2, 1);
    mdp.reward << 1.0, 0.0;
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    mdp.transition = {p};
    mdp.validate();
    const ValueIterationResult vi = value_iteration(mdp, 0.4, 1e-12, 1000);
    REQUIRE(vi.converged);
    CHECK(vi.values(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(vi.values(1) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("contraction, monotonicity, Lipschitz, equivariance properties") {
  math::Rng rng(59);

  SUBCASE("both operators contract at rate beta") {
    for (int trial = 0; trial < 100; ++trial) {
      const double beta = (trial % 2 == 0) ? 0.5 : 0.9;
      TabularMdp mdp = TabularMdp::random(6, 3, beta, rng);
      const PolicyMatrix policy = uniform_policy(mdp);
      Eigen::VectorXd v(6), w(6);
      for (int i = 0; i < 6; ++i) {
        v(i) = rng.uniform(-3.0, 3.0);
        w(i) = rng.uniform(-3.0, 3.0);
      }
      const double tau = rng.uniform(0.05, 0.95);
      const double gap = (v - w).cwiseAbs().maxCoeff();
      const double policy_gap =
          (policy_operator(mdp, v, policy, tau) - policy_operator(mdp, w, policy, tau))
              .cwiseAbs()
              .maxCoeff();
      CHECK(policy_gap <= beta * gap + 1e-12);
      const double greedy_gap = (optimality_operator(mdp, v, tau).values -
                                 optimality_operator(mdp, w, tau).values)
                                    .cwiseAbs()
                                    .maxCoeff();
      CHECK(greedy_gap <= beta * gap + 1e-12);
    }
  }

  SUBCASE("monotonicity in the value argument") {
    for (int trial = 0; trial < 30; ++trial) {
      TabularMdp mdp = TabularMdp::random(5, 2, 0.9, rng);
      Eigen::VectorXd v(5);
      for (int i = 0; i < 5; ++i) v(i) = rng.uniform(-2.0, 2.0);
      Eigen::VectorXd w = v;
      for (int i = 0; i < 5; ++i) w(i) += rng.uniform(0.0, 1.0);
      const double tau = rng.uniform(0.05, 0.95);
      const PolicyMatrix policy = uniform_policy(mdp);
      const Eigen::VectorXd tv = policy_operator(mdp, v, policy, tau);
      const Eigen::VectorXd tw = policy_operator(mdp, w, policy, tau);
      CHECK((tw - tv).minCoeff() >= -1e-12);
    }
  }

  SUBCASE("quantiles are 1-Lipschitz under bounded shifts") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 6;
      std::vector<double> atoms(n), shifted(n), probs(n);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        atoms[i] = rng.uniform(-5.0, 5.0);
        probs[i] = rng.uniform(0.1, 1.0);
        total += probs[i];
      }
      for (double& p : probs) p /= total;
      probs[n - 1] += 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
      const double c = rng.uniform(0.0, 1.0);
      for (int i = 0; i < n; ++i) shifted[i] = atoms[i] + rng.uniform(-c, c);
      const double tau = rng.uniform(0.05, 0.95);
      CHECK(std::abs(discrete_quantile(atoms, probs, tau) -
                     discrete_quantile(shifted, probs, tau)) <= c + 1e-12);
    }
  }

  SUBCASE("positive affine equivariance") {
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 5;
      std::vector<double> atoms(n), scaled(n), probs(n);
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        atoms[i] = rng.uniform(-5.0, 5.0);
        probs[i] = rng.uniform(0.1, 1.0);
        total += probs[i];
      }
      for (double& p : probs) p /= total;
      probs[n - 1] += 1.0 - std::accumulate(probs.begin(), probs.end(), 0.0);
      const double a = rng.uniform(0.1, 3.0);
      const double b = rng.uniform(-2.0, 2.0);
      for (int i = 0; i < n; ++i) scaled[i] = a * atoms[i] + b;
      const double tau = rng.uniform(0.05, 0.95);
      CHECK(discrete_quantile(scaled, probs, tau) ==
            doctest::Approx(a * discrete_quantile(atoms, probs, tau) + b));
    }
  }
}
