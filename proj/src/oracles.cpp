#include "qprl/dp/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qprl/math/normal.hpp"

namespace qprl::dp {

CornerRuleResult corner_rule_value(std::span<const double> return_quantiles,
                                   double risk_free, double discount,
                                   double wealth, int t) {
  if (t < 0 || t > static_cast<int>(return_quantiles.size())) {
    throw std::invalid_argument("corner rule: t outside the horizon");
  }
  CornerRuleResult result;
  // periods k = t+1 .. T remain
  const auto remaining = return_quantiles.subspan(t);
  const int horizon = static_cast<int>(remaining.size());
  double value = std::pow(discount, horizon) * wealth;
  for (int k = 0; k < horizon; ++k) {
    const double q = remaining[k];
    value *= std::max(q, risk_free);
    CornerDecision decision;
    if (q > risk_free) {
      decision.alpha = 1.0;
    } else if (q < risk_free) {
      decision.alpha = 0.0;
    } else {
      decision.indifferent = true;
    }
    result.alphas.push_back(decision);
  }
  result.value = value;
  return result;
}

void TwoPeriodRegimeModel::validate() const {
  if (!(sigma_high > sigma_low && sigma_low > 0.0)) {
    throw std::invalid_argument("two-period model: need 0 < sigma_low < sigma_high");
  }
  // 1 is admitted so absorbing-regime reductions stay testable
  if (!(p_low_stay > 0.0 && p_low_stay <= 1.0 && p_high_stay > 0.0 &&
        p_high_stay <= 1.0)) {
    throw std::invalid_argument("two-period model: persistence must lie in (0, 1]");
  }
  if (!(discount > 0.0 && discount <= 1.0) || !(initial_wealth > 0.0)) {
    throw std::invalid_argument("two-period model: bad discount or wealth");
  }
}

double normal_mixture_quantile(std::span<const double> means,
                               std::span<const double> sds,
                               std::span<const double> probs, double tau) {
  if (means.empty() || means.size() != sds.size() || means.size() != probs.size()) {
    throw std::invalid_argument("mixture quantile: component size mismatch");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("mixture quantile: tau must lie in (0, 1)");
  }
  const auto cdf = [&](double x) {
    double total = 0.0;
    for (std::size_t i = 0; i < means.size(); ++i) {
      if (sds[i] > 1e-15) {
        total += probs[i] * math::std_normal_cdf((x - means[i]) / sds[i]);
      } else if (x >= means[i]) {
        total += probs[i];
      }
    }
    return total;
  };

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double max_sd = 0.0;
  for (double sd : sds) max_sd = std::max(max_sd, sd);
  for (std::size_t i = 0; i < means.size(); ++i) {
    lo = std::min(lo, means[i] - 12.0 * max_sd);
    hi = std::max(hi, means[i] + 12.0 * max_sd);
  }
  if (cdf(hi) < tau) {
    throw std::runtime_error("mixture quantile: bisection bracket failure");
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) >= tau) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

RegimeExampleSolution regime_example_solver(const TwoPeriodRegimeModel& model,
                                            double tau, int alpha_grid_size) {
  model.validate();
  if (alpha_grid_size < 101) {
    throw std::invalid_argument("regime solver: alpha grid must have >= 101 points");
  }
  RegimeExampleSolution sol;
  const std::array<double, 2> sigma = {model.sigma_low, model.sigma_high};

  // Last period: corner rule per regime.
  for (int z = 0; z < 2; ++z) {
    const double q = math::normal_quantile(tau, model.mean_return, sigma[z]);
    sol.m1[z] = std::max(q, model.risk_free);
    if (q > model.risk_free) {
      sol.alpha1[z].alpha = 1.0;
    } else if (q < model.risk_free) {
      sol.alpha1[z].alpha = 0.0;
    } else {
      sol.alpha1[z].indifferent = true;
    }
  }

  sol.alpha_grid.resize(alpha_grid_size);
  for (int i = 0; i < alpha_grid_size; ++i) {
    sol.alpha_grid[i] = static_cast<double>(i) / (alpha_grid_size - 1);
  }

  const double scale =
      model.discount * model.discount * model.initial_wealth;
  for (int z0 = 0; z0 < 2; ++z0) {
    const double stay = (z0 == kRegimeLow) ? model.p_low_stay : model.p_high_stay;
    // transition row of z0: probability of z1 = (L, H)
    const std::array<double, 2> next_prob = {
        (z0 == kRegimeLow) ? stay : 1.0 - stay,
        (z0 == kRegimeLow) ? 1.0 - stay : stay};

    auto& curve = sol.value_curve[z0];
    curve.resize(alpha_grid_size);
    double best_value = -std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    for (int i = 0; i < alpha_grid_size; ++i) {
      const double alpha = sol.alpha_grid[i];
      // Y | z1 = scale * m1[z1] * (alpha R1 + (1-alpha) Rf), R1 | z0 normal.
      std::array<double, 2> means, sds;
      for (int z1 = 0; z1 < 2; ++z1) {
        const double factor = scale * sol.m1[z1];
        means[z1] = factor * (alpha * model.mean_return +
                              (1.0 - alpha) * model.risk_free);
        sds[z1] = factor * alpha * sigma[z0];
      }
      const double value = normal_mixture_quantile(means, sds, next_prob, tau);
      curve[i] = value;
      if (value > best_value) {
        best_value = value;
        best_alpha = alpha;
      }
    }
    sol.alpha0[z0] = best_alpha;
    sol.value0[z0] = best_value;
  }
  return sol;
}

std::vector<StaticChoiceRow> static_choice_comparator(double mu, double sigma,
                                                      double risk_free,
                                                      std::span<const double> taus,
                                                      double cara_a, double mv_gamma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("static comparator: sigma must be positive");
  }
  std::vector<StaticChoiceRow> rows;
  rows.push_back({"risk_neutral", mu > risk_free ? 1.0 : 0.0, mu});
  const double premium = mu - risk_free;
  const double cara = std::clamp(premium / (cara_a * sigma * sigma), 0.0, 1.0);
  rows.push_back({"cara", cara, premium});
  const double mv = std::clamp(premium / (mv_gamma * sigma * sigma), 0.0, 1.0);
  rows.push_back({"mean_variance", mv, premium});
  for (double tau : taus) {
    const double q = math::normal_quantile(tau, mu, sigma);
    rows.push_back({"quantile_" + std::to_string(tau), q > risk_free ? 1.0 : 0.0, q});
  }
  return rows;
}

}  // namespace qprl::dp
