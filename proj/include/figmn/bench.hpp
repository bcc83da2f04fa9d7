#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "figmn/data.hpp"
#include "figmn/inference.hpp"
#include "figmn/learner_fast.hpp"
#include "figmn/learner_reference.hpp"

// Synthetic dimensionality-scaling study: single-Gaussian datasets across
// exponentially growing dimension, wall-clock timing of both learners, and a
// log-log scaling-exponent fit.

namespace figmn::bench {

struct ScalingConfig {
  std::vector<int> dims = {1, 2, 4, 8, 16, 32, 64, 128, 256};
  int n_points = 1000;
  double train_fraction = 0.9;
  std::uint64_t seed = 1;
  bool run_reference = true;
  bool run_fast = true;
  double delta = 1.0;
  double beta = 0.0;  // pins the component count at one
  int repetitions = 3;
};

struct ScalingRow {
  int dim = 0;
  std::string learner;
  double train_seconds = 0.0;
  double test_seconds = 0.0;
  int component_count = 0;
};

// Dimensions up to this size get a randomly rotated covariance; beyond it the
// generator stays diagonal so dataset generation cannot dominate the timing.
inline constexpr int kRotationLimit = 64;

// Smallest dimension admitted into the exponent fit; below it constant
// overheads dominate the wall clock.
inline constexpr int kMinFitDim = 32;

struct GaussianSpec {
  Vec mean;
  Vec variances;  // eigenvalues of the covariance, in [0.5, 2]
  Mat rotation;   // empty when the covariance is diagonal
};

// n points from one fixed, seed-determined Gaussian: mean entries uniform in
// [-1, 1], covariance Q diag(v) Q^T with variances uniform in [0.5, 2] and Q
// a random rotation (identity above kRotationLimit).
inline Dataset gen_gaussian_dataset(int dim, int n, std::uint64_t seed,
                                    GaussianSpec* spec_out = nullptr) {
  if (dim < 1) throw ConfigError("gen_gaussian_dataset: dim must be >= 1");
  if (n < 1) throw ConfigError("gen_gaussian_dataset: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> var_dist(0.5, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GaussianSpec spec;
  spec.mean.resize(dim);
  spec.variances.resize(dim);
  for (int i = 0; i < dim; ++i) spec.mean[i] = mean_dist(rng);
  for (int i = 0; i < dim; ++i) spec.variances[i] = var_dist(rng);
  const bool rotate = dim <= kRotationLimit && dim > 1;
  if (rotate) {
    Mat gaussian(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) gaussian(r, c) = normal(rng);
    spec.rotation = Eigen::HouseholderQR<Mat>(gaussian).householderQ();
  }

  Dataset ds;
  ds.rows.resize(n, dim);
  const Vec sigma = spec.variances.cwiseSqrt();
  Vec z(dim);
  for (int r = 0; r < n; ++r) {
    for (int i = 0; i < dim; ++i) z[i] = sigma[i] * normal(rng);
    ds.rows.row(r) =
        (rotate ? Vec(spec.mean + spec.rotation * z) : Vec(spec.mean + z))
            .transpose();
  }
  for (int i = 0; i < dim; ++i)
    ds.column_names.push_back("x" + std::to_string(i));
  if (spec_out) *spec_out = std::move(spec);
  return ds;
}

namespace detail {

template <class F>
double median_seconds(int repetitions, F&& body) {
  std::vector<double> times;
  times.reserve(repetitions);
  for (int rep = 0; rep < repetitions; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace detail

// Trains on the first train_fraction of each dataset and predicts the last
// dimension from the rest on the held-out remainder, timing only the learning
// and prediction loops (median of `repetitions`).
inline std::vector<ScalingRow> run_scaling(const ScalingConfig& cfg) {
  if (!cfg.run_reference && !cfg.run_fast)
    throw ConfigError("run_scaling: no learners selected");
  for (std::size_t i = 1; i < cfg.dims.size(); ++i)
    if (cfg.dims[i] <= cfg.dims[i - 1])
      throw ConfigError("run_scaling: dims must be strictly increasing");
  if (cfg.repetitions < 1)
    throw ConfigError("run_scaling: repetitions must be >= 1");

  std::vector<ScalingRow> rows;
  for (int dim : cfg.dims) {
    const Dataset ds =
        gen_gaussian_dataset(dim, cfg.n_points, cfg.seed + 1000003u * dim);
    const int n_train = std::max(
        1, static_cast<int>(cfg.train_fraction * ds.n()));
    std::vector<int> train_rows(n_train);
    for (int r = 0; r < n_train; ++r) train_rows[r] = r;
    const ColumnStats stats = column_stats(ds.rows, &train_rows);
    const Partition part = make_partition(dim, {dim - 1});

    for (int which = 0; which < 2; ++which) {
      const bool fast = which == 1;
      if (fast && !cfg.run_fast) continue;
      if (!fast && !cfg.run_reference) continue;

      LearnerConfig lc;
      lc.delta = cfg.delta;
      lc.beta = cfg.beta;
      lc.dataset_std = stats.stddev;
      lc.representation =
          fast ? Representation::precision : Representation::covariance;

      Mixture mix;
      const double train_seconds =
          detail::median_seconds(cfg.repetitions, [&] {
            mix = Mixture(lc);
            for (int r = 0; r < n_train; ++r) {
              const Vec x = ds.rows.row(r).transpose();
              if (fast)
                step_fast(mix, x);
              else
                step_reference(mix, x);
            }
          });
      const double test_seconds =
          detail::median_seconds(cfg.repetitions, [&] {
            for (int r = n_train; r < ds.n(); ++r) {
              Vec x_i(dim - 1);
              for (int c = 0; c + 1 < dim; ++c) x_i[c] = ds.rows(r, c);
              predict(mix, part, x_i);
            }
          });

      ScalingRow row;
      row.dim = dim;
      row.learner = fast ? "fast" : "reference";
      row.train_seconds = train_seconds;
      row.test_seconds = test_seconds;
      row.component_count = static_cast<int>(mix.size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Least-squares slope of log(train_seconds) against log(dim) over one
// learner's rows with dim >= kMinFitDim.
inline double fit_exponent(const std::vector<ScalingRow>& rows,
                           const std::string& learner) {
  std::vector<double> lx, ly;
  for (const auto& row : rows) {
    if (row.learner != learner || row.dim < kMinFitDim) continue;
    lx.push_back(std::log(static_cast<double>(row.dim)));
    ly.push_back(std::log(std::max(row.train_seconds, 1e-12)));
  }
  if (lx.size() < 4)
    throw ConfigError("fit_exponent: need at least 4 rows with dim >= " +
                      std::to_string(kMinFitDim));
  const auto n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline void write_scaling_csv(const std::vector<ScalingRow>& rows,
                              std::ostream& out) {
  out << "dim,learner,train_seconds,test_seconds,component_count\n";
  for (const auto& row : rows)
    out << row.dim << ',' << row.learner << ','
        << format_real(row.train_seconds) << ','
        << format_real(row.test_seconds) << ',' << row.component_count
        << '\n';
}

}  // namespace figmn::bench
