#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "figmn/bench.hpp"
#include "oracles.hpp"

using figmn::Vec;
using figmn::bench::ScalingConfig;
using figmn::bench::ScalingRow;

TEST_CASE("gen_gaussian_dataset: determinism and first moments") {
  figmn::bench::GaussianSpec spec;
  const auto ds = figmn::bench::gen_gaussian_dataset(1, 1000, 7, &spec);
  CHECK(ds.n() == 1000);
  CHECK(ds.cols() == 1);
  const double sample_mean = ds.rows.col(0).mean();
  const double se = std::sqrt(spec.variances[0] / 1000.0);
  CHECK(std::abs(sample_mean - spec.mean[0]) < 5.0 * se);

  const auto again = figmn::bench::gen_gaussian_dataset(1, 1000, 7);
  CHECK(ds.rows == again.rows);
  const auto other = figmn::bench::gen_gaussian_dataset(1, 1000, 8);
  CHECK(ds.rows != other.rows);

  const auto four = figmn::bench::gen_gaussian_dataset(4, 50, 3);
  CHECK(four.cols() == 4);
  CHECK_FALSE(four.class_column.has_value());
}

TEST_CASE("rotated covariance has the requested spectrum") {
  figmn::bench::GaussianSpec spec;
  const auto ds = figmn::bench::gen_gaussian_dataset(8, 20000, 11, &spec);
  REQUIRE(spec.rotation.size() > 0);
  // sample covariance approaches Q diag(v) Q^T
  const figmn::Mat centered =
      ds.rows.rowwise() - ds.rows.colwise().mean();
  const figmn::Mat sample_cov =
      centered.transpose() * centered / static_cast<double>(ds.n());
  const figmn::Mat want = spec.rotation *
                          spec.variances.asDiagonal() *
                          spec.rotation.transpose();
  CHECK((sample_cov - want).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("fit_exponent recovers constructed slopes") {
  auto rows_for = [](double power) {
    std::vector<ScalingRow> rows;
    for (int dim : {32, 64, 128, 256}) {
      ScalingRow row;
      row.dim = dim;
      row.learner = "fast";
      row.train_seconds = std::pow(static_cast<double>(dim), power);
      rows.push_back(row);
    }
    return rows;
  };
  CHECK_THAT(figmn::bench::fit_exponent(rows_for(2.0), "fast"),
             Catch::Matchers::WithinAbs(2.0, 1e-9));
  CHECK_THAT(figmn::bench::fit_exponent(rows_for(3.0), "fast"),
             Catch::Matchers::WithinAbs(3.0, 1e-9));
  CHECK_THROWS_AS(figmn::bench::fit_exponent(rows_for(2.0), "reference"),
                  figmn::ConfigError);
}

TEST_CASE("run_scaling emits well-formed rows and matched predictions") {
  ScalingConfig cfg;
  cfg.dims = {4, 8};
  cfg.n_points = 200;
  cfg.repetitions = 1;
  cfg.seed = 5;
  const auto rows = figmn::bench::run_scaling(cfg);
  REQUIRE(rows.size() == 4);  // 2 dims x 2 learners
  for (const auto& row : rows) {
    CHECK(row.component_count == 1);  // beta = 0
    CHECK(row.train_seconds >= 0.0);
    CHECK(row.test_seconds >= 0.0);
  }

  std::ostringstream csv;
  figmn::bench::write_scaling_csv(rows, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("dim,learner,train_seconds,test_seconds,"
                   "component_count\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  // the two learners predict the held-out target identically
  for (int dim : cfg.dims) {
    const auto ds =
        figmn::bench::gen_gaussian_dataset(dim, 200, cfg.seed + 1000003u * dim);
    const int n_train = 180;
    std::vector<int> train_rows(n_train);
    std::iota(train_rows.begin(), train_rows.end(), 0);
    const auto stats = figmn::column_stats(ds.rows, &train_rows);
    figmn::LearnerConfig lc;
    lc.delta = 1.0;
    lc.beta = 0.0;
    lc.dataset_std = stats.stddev;

    lc.representation = figmn::Representation::precision;
    figmn::Mixture fast(lc);
    lc.representation = figmn::Representation::covariance;
    figmn::Mixture ref(lc);
    for (int r = 0; r < n_train; ++r) {
      const Vec x = ds.rows.row(r).transpose();
      figmn::step_fast(fast, x);
      figmn::step_reference(ref, x);
    }
    const auto part = figmn::make_partition(dim, {dim - 1});
    for (int r = n_train; r < 200; ++r) {
      Vec x_i(dim - 1);
      for (int c = 0; c + 1 < dim; ++c) x_i[c] = ds.rows(r, c);
      const auto pf = figmn::predict(fast, part, x_i);
      const auto pr = figmn::predict(ref, part, x_i);
      CHECK(std::abs(pf.target_mean[0] - pr.target_mean[0]) < 1e-8);
    }
  }
}

TEST_CASE("run_scaling validates its configuration") {
  ScalingConfig none;
  none.run_fast = none.run_reference = false;
  CHECK_THROWS_AS(figmn::bench::run_scaling(none), figmn::ConfigError);
  ScalingConfig unsorted;
  unsorted.dims = {4, 4};
  CHECK_THROWS_AS(figmn::bench::run_scaling(unsorted), figmn::ConfigError);
}

TEST_CASE("fast-learner training time grows with dimension") {
  ScalingConfig cfg;
  cfg.dims = {8, 32, 128};
  cfg.n_points = 400;
  cfg.repetitions = 3;
  cfg.run_reference = false;
  const auto rows = figmn::bench::run_scaling(cfg);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].train_seconds >= 0.8 * rows[i - 1].train_seconds);
}
