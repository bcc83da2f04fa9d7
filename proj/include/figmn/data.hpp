#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "figmn/errors.hpp"
#include "figmn/numerics.hpp"

// Tabular data ingestion, statistics, encoding, and resampling. Datasets are
// immutable after load and freely shared.

namespace figmn {

// Formats a double with 17 significant digits, enough to round-trip the exact
// bit pattern through text.
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Dataset {
  Mat rows;  // numeric payload; a class column is stored label-encoded
  std::vector<std::string> column_names;
  std::optional<int> class_column;
  std::vector<std::string> class_labels;  // in order of first appearance

  int n() const { return static_cast<int>(rows.rows()); }
  int cols() const { return static_cast<int>(rows.cols()); }
};

struct ColumnStats {
  Vec mean;
  Vec stddev;  // population standard deviation, floored at kStdFloorData
};

inline constexpr double kStdFloorData = 1e-9;

struct FoldPlan {
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> fold_of_row;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_strict_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

}  // namespace detail

// Comma-separated, header row, '.' decimal separator. Every cell must be a
// finite number except the (optional) class column, whose distinct values are
// label-encoded in order of first appearance.
inline Dataset load_csv(const std::string& path,
                        const std::optional<std::string>& class_column = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  Dataset ds;
  ds.column_names = detail::split_csv_line(line);
  const int width = static_cast<int>(ds.column_names.size());
  if (width == 0) throw ParseError(path + ": empty header");
  if (class_column) {
    auto it = std::find(ds.column_names.begin(), ds.column_names.end(),
                        *class_column);
    if (it == ds.column_names.end())
      throw ParseError(path + ": no column named '" + *class_column + "'");
    ds.class_column = static_cast<int>(it - ds.column_names.begin());
  }

  std::vector<std::vector<double>> parsed;
  int row_no = 1;  // 1-based data row index for messages
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (static_cast<int>(cells.size()) != width)
      throw ParseError(path + ": row " + std::to_string(row_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(width));
    std::vector<double> row(width);
    for (int c = 0; c < width; ++c) {
      if (ds.class_column && c == *ds.class_column) {
        auto it = std::find(ds.class_labels.begin(), ds.class_labels.end(),
                            cells[c]);
        if (it == ds.class_labels.end()) {
          ds.class_labels.push_back(cells[c]);
          it = ds.class_labels.end() - 1;
        }
        row[c] = static_cast<double>(it - ds.class_labels.begin());
      } else if (!detail::parse_strict_double(cells[c], row[c])) {
        throw ParseError(path + ": row " + std::to_string(row_no) +
                         ", column '" + ds.column_names[c] +
                         "': not a finite number: '" + cells[c] + "'");
      }
    }
    parsed.push_back(std::move(row));
    ++row_no;
  }
  if (parsed.empty()) throw ParseError(path + ": no data rows");
  ds.rows.resize(static_cast<Eigen::Index>(parsed.size()), width);
  for (std::size_t r = 0; r < parsed.size(); ++r)
    for (int c = 0; c < width; ++c)
      ds.rows(static_cast<Eigen::Index>(r), c) = parsed[r][c];
  return ds;
}

// Writes the numeric payload with 17-significant-digit decimals; the loader
// reads the exact same values back.
inline void save_csv(const Mat& rows,
                     const std::vector<std::string>& column_names,
                     std::ostream& out) {
  for (std::size_t c = 0; c < column_names.size(); ++c)
    out << (c ? "," : "") << column_names[c];
  out << '\n';
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c)
      out << (c ? "," : "") << format_real(rows(r, c));
    out << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  save_csv(ds.rows, ds.column_names, out);
}

// Per-column mean and population standard deviation over the given rows,
// accumulated with Welford's single-pass recurrence.
inline ColumnStats column_stats(const Mat& rows,
                                const std::vector<int>* row_subset = nullptr) {
  const Eigen::Index cols = rows.cols();
  const Eigen::Index n =
      row_subset ? static_cast<Eigen::Index>(row_subset->size()) : rows.rows();
  if (n < 1) throw std::invalid_argument("column_stats: no rows");
  ColumnStats st;
  st.mean = Vec::Zero(cols);
  Vec m2 = Vec::Zero(cols);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = row_subset ? (*row_subset)[i] : i;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double x = rows(r, c);
      const double delta = x - st.mean[c];
      st.mean[c] += delta / static_cast<double>(i + 1);
      m2[c] += delta * (x - st.mean[c]);
    }
  }
  st.stddev.resize(cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const double sd = std::sqrt(m2[c] / static_cast<double>(n));
    st.stddev[c] = sd < kStdFloorData ? kStdFloorData : sd;
  }
  return st;
}

inline ColumnStats column_stats(const Dataset& ds) {
  return column_stats(ds.rows);
}

// Replaces the class column by one 0/1 indicator column per label, appended
// after the feature columns. The result has features + classes columns and no
// class column of its own.
inline Dataset one_hot(const Dataset& ds) {
  if (!ds.class_column)
    throw std::invalid_argument("one_hot: dataset has no class column");
  const int cls = *ds.class_column;
  const int labels = static_cast<int>(ds.class_labels.size());
  const int features = ds.cols() - 1;
  Dataset out;
  out.class_labels = ds.class_labels;
  out.rows = Mat::Zero(ds.rows.rows(), features + labels);
  for (int c = 0, oc = 0; c < ds.cols(); ++c) {
    if (c == cls) continue;
    out.rows.col(oc) = ds.rows.col(c);
    out.column_names.push_back(ds.column_names[c]);
    ++oc;
  }
  const std::string cls_name = ds.column_names[cls];
  for (int l = 0; l < labels; ++l)
    out.column_names.push_back(cls_name + "=" + ds.class_labels[l]);
  for (Eigen::Index r = 0; r < ds.rows.rows(); ++r) {
    const int label = static_cast<int>(ds.rows(r, cls));
    out.rows(r, features + label) = 1.0;
  }
  return out;
}

// Deterministic stratified k-fold assignment: rows are shuffled under the
// seed (within each class when a class column is set) and dealt in order
// through a single running fold counter, so fold sizes differ by at most one
// overall and per class.
inline FoldPlan stratified_kfold(const Dataset& ds, int folds,
                                 std::uint64_t seed) {
  if (folds < 2) throw ConfigError("stratified_kfold: folds must be >= 2");
  if (folds > ds.n())
    throw ConfigError("stratified_kfold: more folds than rows");
  FoldPlan plan;
  plan.folds = folds;
  plan.seed = seed;
  plan.fold_of_row.assign(static_cast<std::size_t>(ds.n()), -1);

  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> groups;
  if (ds.class_column) {
    groups.resize(ds.class_labels.size());
    for (int r = 0; r < ds.n(); ++r)
      groups[static_cast<std::size_t>(ds.rows(r, *ds.class_column))]
          .push_back(r);
  } else {
    groups.resize(1);
    for (int r = 0; r < ds.n(); ++r) groups[0].push_back(r);
  }
  int counter = 0;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    for (int r : group) {
      plan.fold_of_row[static_cast<std::size_t>(r)] = counter % folds;
      ++counter;
    }
  }
  return plan;
}

}  // namespace figmn
