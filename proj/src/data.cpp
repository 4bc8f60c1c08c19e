#include "qprl/env/data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qprl::env {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ReturnsTable load_returns_csv(const std::string& path, bool forward_fill) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open returns file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty returns file: " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || strip(header[0]) != "date") {
    throw std::runtime_error("returns file must start with a date column: " + path);
  }

  ReturnsTable table;
  std::vector<int> asset_cols, feature_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = strip(header[c]);
    if (name.rfind("feat_", 0) == 0) {
      table.feature_names.push_back(name);
      feature_cols.push_back(static_cast<int>(c));
    } else {
      table.asset_names.push_back(name);
      asset_cols.push_back(static_cast<int>(c));
    }
  }
  if (asset_cols.empty()) {
    throw std::runtime_error("returns file has no asset columns: " + path);
  }

  std::vector<std::vector<double>> ret_rows, feat_rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("row " + std::to_string(line_no) +
                               ": column count mismatch");
    }
    const std::string date = strip(cells[0]);
    if (!table.dates.empty()) {
      if (date == table.dates.back()) {
        throw std::runtime_error("duplicate date " + date);
      }
      if (date < table.dates.back()) {
        throw std::runtime_error("dates out of order at " + date);
      }
    }
    table.dates.push_back(date);

    auto parse_cells = [&](const std::vector<int>& cols,
                           std::vector<std::vector<double>>& rows) {
      std::vector<double> row(cols.size());
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const std::string cell = strip(cells[cols[j]]);
        if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") {
          if (forward_fill && !rows.empty()) {
            row[j] = rows.back()[j];
            continue;
          }
          throw std::runtime_error("missing value at row " + std::to_string(line_no));
        }
        std::size_t used = 0;
        row[j] = std::stod(cell, &used);
        if (used != cell.size() || !std::isfinite(row[j])) {
          throw std::runtime_error("bad numeric value '" + cell + "' at row " +
                                   std::to_string(line_no));
        }
      }
      rows.push_back(std::move(row));
    };
    parse_cells(asset_cols, ret_rows);
    parse_cells(feature_cols, feat_rows);
  }
  if (ret_rows.empty()) throw std::runtime_error("returns file has no data rows");

  const int rows = static_cast<int>(ret_rows.size());
  table.returns.resize(rows, static_cast<int>(asset_cols.size()));
  table.features.resize(rows, static_cast<int>(feature_cols.size()));
  for (int r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < asset_cols.size(); ++c) {
      table.returns(r, static_cast<int>(c)) = ret_rows[r][c];
    }
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      table.features(r, static_cast<int>(c)) = feat_rows[r][c];
    }
  }
  return table;
}

void write_returns_csv(const std::string& path, const ReturnsTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write returns file: " + path);
  out << "date";
  for (const auto& name : table.asset_names) out << ',' << name;
  for (const auto& name : table.feature_names) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (int r = 0; r < table.rows(); ++r) {
    out << table.dates[r];
    for (int c = 0; c < table.returns.cols(); ++c) out << ',' << table.returns(r, c);
    for (int c = 0; c < table.features.cols(); ++c) out << ',' << table.features(r, c);
    out << '\n';
  }
}

Eigen::MatrixXd rolling_zscore(const Eigen::MatrixXd& series, int window) {
  if (window < 2) throw std::invalid_argument("rolling_zscore: window must be >= 2");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(series.rows(), series.cols());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < series.cols(); ++c) {
    for (int t = window - 1; t < series.rows(); ++t) {
      double mean = 0.0;
      for (int i = t - window + 1; i <= t; ++i) mean += series(i, c);
      mean /= window;
      double var = 0.0;
      for (int i = t - window + 1; i <= t; ++i) {
        const double d = series(i, c) - mean;
        var += d * d;
      }
      var /= (window - 1);
      const double sd = std::sqrt(var);
      // constant windows carry no signal; the threshold absorbs the
      // floating-point dust a literally constant series produces
      if (sd > 1e-12 * (std::abs(mean) + 1.0)) {
        out(t, c) = (series(t, c) - mean) / sd;
      }
    }
  }
  return out;
}

}  // namespace qprl::env
