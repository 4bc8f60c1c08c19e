#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace qprl::env {

/// Column-aligned daily data: one row per date, returns as decimal
/// fractions, optional exogenous feature columns (header prefix feat_).
struct ReturnsTable {
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  std::vector<std::string> asset_names;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd returns;   // rows x assets
  Eigen::MatrixXd features;  // rows x features (0 columns when absent)

  int rows() const { return static_cast<int>(dates.size()); }
};

/// Parses `date,<asset...>[,feat_*...]` CSV. Missing cells are a hard
/// error unless `forward_fill` is set, in which case they copy the
/// previous row (a missing cell in the first row is always an error).
/// Shuffled or duplicate dates are rejected.
ReturnsTable load_returns_csv(const std::string& path, bool forward_fill = false);

void write_returns_csv(const std::string& path, const ReturnsTable& table);

/// Trailing-window z-score per column: entry (t, j) is standardized by
/// the mean and sample stdev of rows [t-window+1, t]. The first
/// window-1 rows are warm-up and left at zero; zero-variance windows map
/// to zero.
Eigen::MatrixXd rolling_zscore(const Eigen::MatrixXd& series, int window);

inline int zscore_warmup(int window) { return window - 1; }

}  // namespace qprl::env
