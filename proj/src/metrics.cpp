#include "qprl/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qprl/math/normal.hpp"

namespace qprl::metrics {

namespace {

constexpr double kTradingDays = 252.0;

double ratio_or_inf(double numerator, double denominator) {
  if (denominator == 0.0) {
    return numerator >= 0.0 ? std::numeric_limits<double>::infinity()
                            : -std::numeric_limits<double>::infinity();
  }
  return numerator / denominator;
}

}  // namespace

PerfSummary performance_summary(std::span<const double> daily_returns) {
  const int n = static_cast<int>(daily_returns.size());
  if (n < 30) {
    throw std::invalid_argument("performance_summary: need at least 30 observations");
  }

  double mean = 0.0;
  for (double r : daily_returns) mean += r;
  mean /= n;

  double var = 0.0, downside = 0.0, skew = 0.0, kurt = 0.0;
  for (double r : daily_returns) {
    const double d = r - mean;
    var += d * d;
    skew += d * d * d;
    kurt += d * d * d * d;
    const double neg = std::min(r, 0.0);
    downside += neg * neg;
  }
  var /= (n - 1);
  double stdev = std::sqrt(var);
  // a literally constant series leaves only accumulation dust
  if (stdev < 1e-12 * (std::abs(mean) + 1.0)) stdev = 0.0;
  const double semidev = std::sqrt(downside / n);
  if (stdev > 0.0) {
    skew = (skew / n) / (stdev * stdev * stdev);
    kurt = (kurt / n) / (var * var) - 3.0;
  } else {
    skew = 0.0;
    kurt = 0.0;
    var = 0.0;
  }

  // empirical 5th percentile (inf convention) and the tail mean
  std::vector<double> sorted(daily_returns.begin(), daily_returns.end());
  std::sort(sorted.begin(), sorted.end());
  int var_index = static_cast<int>(std::ceil(0.05 * n - 1e-9)) - 1;
  var_index = std::clamp(var_index, 0, n - 1);
  const double var95 = sorted[var_index];
  double tail_sum = 0.0;
  int tail_count = 0;
  for (double r : sorted) {
    if (r <= var95) {
      tail_sum += r;
      ++tail_count;
    } else {
      break;
    }
  }
  const double cvar95 = tail_sum / tail_count;

  // drawdown over the cumulative wealth path
  double wealth = 1.0, peak = 1.0, drawdown_sum = 0.0;
  for (double r : daily_returns) {
    wealth *= 1.0 + r;
    peak = std::max(peak, wealth);
    drawdown_sum += 1.0 - wealth / peak;
  }

  // Cornish-Fisher modified quantile at 5%
  const double z = math::std_normal_quantile(0.05);
  const double z_cf = z + (z * z - 1.0) * skew / 6.0 +
                      (z * z * z - 3.0 * z) * kurt / 24.0 -
                      (2.0 * z * z * z - 5.0 * z) * skew * skew / 36.0;
  const double mvar = mean + z_cf * stdev;

  PerfSummary s;
  s.ann_mean_pct = kTradingDays * mean * 100.0;
  s.ann_stdev_pct = std::sqrt(kTradingDays) * stdev * 100.0;
  s.ann_semidev_pct = std::sqrt(kTradingDays) * semidev * 100.0;
  s.var95_pct = var95 * 100.0;
  s.cvar95_pct = cvar95 * 100.0;
  s.avg_drawdown_pct = drawdown_sum / n * 100.0;
  s.mvar95_pct = mvar * 100.0;
  s.sharpe = ratio_or_inf(s.ann_mean_pct, s.ann_stdev_pct);
  s.sortino = ratio_or_inf(s.ann_mean_pct, s.ann_semidev_pct);
  s.tail_sharpe_cvar = ratio_or_inf(s.ann_mean_pct, std::abs(s.cvar95_pct));
  s.tail_sharpe_mvar = ratio_or_inf(s.ann_mean_pct, std::abs(s.mvar95_pct));
  return s;
}

std::vector<std::pair<std::string, double>> summary_rows(const PerfSummary& s) {
  return {{"Ann. Mean (%)", s.ann_mean_pct},
          {"Ann. StdDev (%)", s.ann_stdev_pct},
          {"Ann. SemiDev (%)", s.ann_semidev_pct},
          {"CVaR 95% (%)", s.cvar95_pct},
          {"Avg DD (%)", s.avg_drawdown_pct},
          {"VaR 95% (%)", s.var95_pct},
          {"Sharpe (ann.)", s.sharpe},
          {"Sortino (ann.)", s.sortino},
          {"Tail-Adj Sharpe (CVaR95)", s.tail_sharpe_cvar},
          {"Tail-Adj Sharpe (mVaR95)", s.tail_sharpe_mvar}};
}

void write_metrics_csv(const std::string& path,
                       const std::vector<std::string>& strategy_names,
                       const std::vector<PerfSummary>& summaries) {
  if (strategy_names.size() != summaries.size()) {
    throw std::invalid_argument("write_metrics_csv: name/summary count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  out << "Metric";
  for (const auto& name : strategy_names) out << ',' << name;
  out << '\n';
  out.precision(10);
  const auto rows = summary_rows(PerfSummary{});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << '"' << rows[r].first << '"';
    for (const auto& summary : summaries) {
      out << ',' << summary_rows(summary)[r].second;
    }
    out << '\n';
  }
}

Eigen::VectorXd weight_summary(const Eigen::MatrixXd& weights_over_time) {
  if (weights_over_time.rows() == 0) {
    throw std::invalid_argument("weight_summary: empty trajectory");
  }
  return weights_over_time.colwise().mean();
}

std::map<int, Eigen::VectorXd> weight_summary_by_regime(
    const Eigen::MatrixXd& weights_over_time, std::span<const int> regimes) {
  if (weights_over_time.rows() != static_cast<long>(regimes.size())) {
    throw std::invalid_argument("weight_summary: regime label count mismatch");
  }
  std::map<int, Eigen::VectorXd> sums;
  std::map<int, int> counts;
  for (long t = 0; t < weights_over_time.rows(); ++t) {
    auto [it, inserted] = sums.try_emplace(
        regimes[t], Eigen::VectorXd::Zero(weights_over_time.cols()));
    it->second += weights_over_time.row(t).transpose();
    ++counts[regimes[t]];
  }
  for (auto& [regime, total] : sums) total /= counts[regime];
  return sums;
}

Eigen::VectorXd average_icdf(const Eigen::MatrixXd& per_state_curves) {
  if (per_state_curves.rows() == 0) {
    throw std::invalid_argument("average_icdf: no states");
  }
  return per_state_curves.colwise().mean();
}

}  // namespace qprl::metrics
