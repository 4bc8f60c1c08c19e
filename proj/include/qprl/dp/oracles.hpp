#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace qprl::dp {

/// All-or-nothing allocation for one period; `indifferent` flags the
/// knife-edge case where the targeted return quantile equals the safe rate.
struct CornerDecision {
  double alpha = 0.0;
  bool indifferent = false;
};

struct CornerRuleResult {
  double value = 0.0;
  std::vector<CornerDecision> alphas;  // one per remaining period
};

/// Closed-form value of the i.i.d. terminal-wealth problem:
/// discount^(T-t) * wealth * prod_{k>t} max(return_quantiles[k], risk_free),
/// with the per-period corner allocations. `return_quantiles` holds the
/// targeted quantile of R_1..R_T; periods before `t` are already past.
CornerRuleResult corner_rule_value(std::span<const double> return_quantiles,
                                   double risk_free, double discount,
                                   double wealth, int t = 0);

/// Two-period world with a persistent two-state volatility regime.
struct TwoPeriodRegimeModel {
  double risk_free = 1.04;     // gross
  double mean_return = 1.10;   // gross mean of the risky asset
  double sigma_low = 0.03;
  double sigma_high = 0.051;   // 1.7 * sigma_low
  double p_low_stay = 0.7;
  double p_high_stay = 0.7;
  double discount = 0.99;
  double initial_wealth = 1.0;

  void validate() const;
};

inline constexpr int kRegimeLow = 0;
inline constexpr int kRegimeHigh = 1;

/// tau-quantile of a finite mixture of normals, found by bisection on the
/// mixture CDF to 1e-10. Degenerate (zero-sd) components are handled as
/// step functions, so the result follows the left-continuous inf
/// convention at jumps.
double normal_mixture_quantile(std::span<const double> means,
                               std::span<const double> sds,
                               std::span<const double> probs, double tau);

struct RegimeExampleSolution {
  std::array<CornerDecision, 2> alpha1;  // t=1 corner allocation per regime
  std::array<double, 2> m1;              // max(Q_tau[R | z], risk_free)
  std::array<double, 2> alpha0;          // t=0 optimum per initial regime
  std::array<double, 2> value0;          // optimal t=0 value per initial regime
  std::vector<double> alpha_grid;
  std::array<std::vector<double>, 2> value_curve;  // t=0 value over the grid
};

/// Brute-force solution of the two-period regime example: the last period
/// is the corner rule per regime; the first period is a grid search whose
/// objective is the tau-quantile of a two-component normal mixture.
/// Requires alpha_grid_size >= 101.
RegimeExampleSolution regime_example_solver(const TwoPeriodRegimeModel& model,
                                            double tau, int alpha_grid_size);

struct StaticChoiceRow {
  std::string preference;  // "risk_neutral", "cara", "mean_variance", "quantile_<tau>"
  double alpha_star = 0.0;
  double criterion = 0.0;  // the statistic the rule compares against risk_free
};

/// One-period decision table across preference models for
/// R ~ Normal(mu, sigma^2) returns.
std::vector<StaticChoiceRow> static_choice_comparator(double mu, double sigma,
                                                      double risk_free,
                                                      std::span<const double> taus,
                                                      double cara_a, double mv_gamma);

}  // namespace qprl::dp
