#pragma once

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qprl::metrics {

/// Fields mirror the reporting table rows; percentages are daily tail
/// numbers and annualized moments, ratios are unitless. Sharpe-type
/// ratios on a zero-dispersion series report an infinity sentinel.
struct PerfSummary {
  double ann_mean_pct = 0.0;
  double ann_stdev_pct = 0.0;
  double ann_semidev_pct = 0.0;
  double cvar95_pct = 0.0;
  double avg_drawdown_pct = 0.0;
  double var95_pct = 0.0;
  double sharpe = 0.0;
  double sortino = 0.0;
  double tail_sharpe_cvar = 0.0;
  double tail_sharpe_mvar = 0.0;
  double mvar95_pct = 0.0;  // Cornish-Fisher modified VaR (daily, %)
};

/// Risk-return summary of a daily return series; needs at least 30
/// observations. Annualization uses 252 days; semideviation is the RMS
/// of min(r,0) over all observations; VaR/CVaR are the empirical 5th
/// percentile and the mean at or below it; average drawdown is the time
/// average of 1 - wealth/peak over the cumulative wealth path.
PerfSummary performance_summary(std::span<const double> daily_returns);

/// Row order used in metrics.csv.
std::vector<std::pair<std::string, double>> summary_rows(const PerfSummary& summary);

/// `metrics.csv` with one column per strategy and the standard row names.
void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& strategy_names,
                       const std::vector<PerfSummary>& summaries);

/// Time-averaged weights of a trajectory (rows sum to one).
Eigen::VectorXd weight_summary(const Eigen::MatrixXd& weights_over_time);

/// Per-regime time averages, keyed by regime label.
std::map<int, Eigen::VectorXd> weight_summary_by_regime(
    const Eigen::MatrixXd& weights_over_time, std::span<const int> regimes);

/// Mean of per-state quantile curves; curves stack one state per row.
Eigen::VectorXd average_icdf(const Eigen::MatrixXd& per_state_curves);

}  // namespace qprl::metrics
