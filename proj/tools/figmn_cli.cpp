// Command-line front end: train / predict / eval / bench / rl subcommands.
// All reports are CSV written to --out or standard output; summaries and
// timings go to stderr. Exit codes: 0 success, 1 runtime failure, 2 usage
// error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "figmn/figmn.hpp"

namespace {

using figmn::Mat;
using figmn::Vec;

struct TrainOptions {
  std::string data_path;
  std::string class_column;
  double delta = 0.5;
  double beta = std::numeric_limits<double>::denorm_min();
  std::int64_t v_min = 5;
  double sp_min = 3.0;
  std::string learner = "fast";
  std::uint64_t seed = 1;
  bool shuffle = false;
  bool standardize = false;
  bool no_prune = false;
};

void add_train_flags(CLI::App* cmd, TrainOptions& opt) {
  cmd->add_option("--data", opt.data_path, "input CSV (header row)")
      ->required();
  cmd->add_option("--class", opt.class_column,
                  "class column name (one-hot encoded for training)");
  cmd->add_option("--delta", opt.delta, "sigma_ini scaling factor");
  cmd->add_option("--beta", opt.beta,
                  "novelty percentile parameter in [0,1); 0 pins one component");
  cmd->add_option("--vmin", opt.v_min, "pruning age threshold");
  cmd->add_option("--spmin", opt.sp_min, "pruning accumulator threshold");
  cmd->add_option("--learner", opt.learner, "fast | reference")
      ->check(CLI::IsMember({"fast", "reference"}));
  cmd->add_option("--seed", opt.seed, "seed for all randomness");
  cmd->add_flag("--shuffle", opt.shuffle, "shuffle training order under --seed");
  cmd->add_flag("--standardize", opt.standardize,
                "z-score feature columns from training statistics");
  cmd->add_flag("--no-prune", opt.no_prune, "disable component pruning");
}

std::ostream& open_report(const std::string& out_path, std::ofstream& file) {
  if (out_path.empty()) return std::cout;
  file.open(out_path);
  if (!file) throw figmn::ParseError("cannot write '" + out_path + "'");
  return file;
}

// Feature-only z-scoring: one-hot class columns keep shift 0 / scale 1.
figmn::Standardizer make_standardizer(const figmn::ColumnStats& stats,
                                      int feature_count, int dim) {
  figmn::Standardizer st;
  st.shift = Vec::Zero(dim);
  st.scale = Vec::Ones(dim);
  for (int c = 0; c < feature_count; ++c) {
    st.shift[c] = stats.mean[c];
    st.scale[c] = stats.stddev[c];
  }
  return st;
}

Vec apply_standardizer(const figmn::Standardizer& st, const Vec& x) {
  return (x - st.shift).cwiseQuotient(st.scale);
}

figmn::LearnerConfig build_config(const TrainOptions& opt, Vec dataset_std) {
  figmn::LearnerConfig cfg;
  cfg.delta = opt.delta;
  cfg.beta = opt.beta;
  cfg.v_min = opt.v_min;
  cfg.sp_min = opt.sp_min;
  cfg.pruning_enabled = !opt.no_prune;
  cfg.dataset_std = std::move(dataset_std);
  cfg.representation = opt.learner == "fast" ? figmn::Representation::precision
                                             : figmn::Representation::covariance;
  return cfg;
}

// Single pass over the given rows, timed around the learning loop only.
figmn::Mixture train_rows(const figmn::LearnerConfig& cfg, const Mat& rows,
                          const std::vector<int>& order, bool fast,
                          double* seconds_out = nullptr) {
  figmn::Mixture mix(cfg);
  const auto start = std::chrono::steady_clock::now();
  for (int r : order) {
    const Vec x = rows.row(r).transpose();
    if (fast)
      figmn::step_fast(mix, x);
    else
      figmn::step_reference(mix, x);
  }
  const auto stop = std::chrono::steady_clock::now();
  if (seconds_out)
    *seconds_out = std::chrono::duration<double>(stop - start).count();
  return mix;
}

std::vector<int> resolve_columns(const std::string& spec,
                                 const std::vector<std::string>& names) {
  std::vector<int> idx;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    auto it = std::find(names.begin(), names.end(), token);
    if (it != names.end()) {
      idx.push_back(static_cast<int>(it - names.begin()));
      continue;
    }
    try {
      std::size_t used = 0;
      const int v = std::stoi(token, &used);
      if (used != token.size() || v < 0 ||
          v >= static_cast<int>(names.size()))
        throw std::invalid_argument(token);
      idx.push_back(v);
    } catch (const std::exception&) {
      throw figmn::ConfigError("unknown column '" + token + "'");
    }
  }
  if (idx.empty()) throw figmn::ConfigError("no target columns given");
  return idx;
}

int cmd_train(const TrainOptions& opt, const std::string& out_path) {
  if (out_path.empty()) throw figmn::ConfigError("--out is required for train");
  const std::optional<std::string> cls =
      opt.class_column.empty() ? std::nullopt
                               : std::optional<std::string>(opt.class_column);
  figmn::Dataset ds = figmn::load_csv(opt.data_path, cls);
  figmn::Dataset enc = cls ? figmn::one_hot(ds) : ds;
  const int feature_count =
      cls ? enc.cols() - static_cast<int>(enc.class_labels.size()) : enc.cols();

  figmn::ModelFile model;
  if (opt.standardize) {
    const auto stats = figmn::column_stats(enc.rows);
    const auto st = make_standardizer(stats, feature_count, enc.cols());
    for (Eigen::Index r = 0; r < enc.rows.rows(); ++r)
      enc.rows.row(r) =
          apply_standardizer(st, enc.rows.row(r).transpose()).transpose();
    model.standardizer = st;
  }
  const auto stats = figmn::column_stats(enc.rows);

  std::vector<int> order(enc.n());
  std::iota(order.begin(), order.end(), 0);
  if (opt.shuffle) {
    std::mt19937_64 rng(opt.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  double seconds = 0.0;
  model.mixture = train_rows(build_config(opt, stats.stddev), enc.rows, order,
                             opt.learner == "fast", &seconds);
  figmn::save_model(model, out_path);
  std::cerr << "trained components=" << model.mixture.size()
            << " train_seconds=" << seconds << " model=" << out_path << '\n';
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& targets, const std::string& out_path) {
  figmn::ModelFile model = figmn::load_model(model_path);
  figmn::Dataset ds = figmn::load_csv(data_path);
  const int dim = model.mixture.dimension();
  if (ds.cols() != dim)
    throw figmn::ConfigError("data has " + std::to_string(ds.cols()) +
                             " columns but the model expects " +
                             std::to_string(dim));
  const std::vector<int> target_idx = resolve_columns(targets, ds.column_names);
  const figmn::Partition part = figmn::make_partition(dim, target_idx);

  std::ofstream file;
  std::ostream& out = open_report(out_path, file);
  for (std::size_t t = 0; t < target_idx.size(); ++t)
    out << (t ? "," : "") << "pred_" << ds.column_names[target_idx[t]];
  for (std::size_t t = 0; t < target_idx.size(); ++t)
    out << ",var_" << ds.column_names[target_idx[t]];
  out << '\n';

  for (Eigen::Index r = 0; r < ds.rows.rows(); ++r) {
    Vec row = ds.rows.row(r).transpose();
    if (model.standardizer) row = apply_standardizer(*model.standardizer, row);
    Vec x_i(part.known_idx.size());
    for (std::size_t i = 0; i < part.known_idx.size(); ++i)
      x_i[static_cast<Eigen::Index>(i)] = row[part.known_idx[i]];
    const auto pred = figmn::predict(model.mixture, part, x_i);
    Vec mean = pred.target_mean;
    Vec var = pred.target_cov.diagonal();
    if (model.standardizer) {
      for (std::size_t t = 0; t < target_idx.size(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        const double scale = model.standardizer->scale[target_idx[t]];
        mean[ti] = mean[ti] * scale + model.standardizer->shift[target_idx[t]];
        var[ti] *= scale * scale;
      }
    }
    for (Eigen::Index c = 0; c < mean.size(); ++c)
      out << (c ? "," : "") << figmn::format_real(mean[c]);
    for (Eigen::Index c = 0; c < var.size(); ++c)
      out << ',' << figmn::format_real(var[c]);
    out << '\n';
  }
  return 0;
}

int cmd_eval(const TrainOptions& opt, int folds, const std::string& targets,
             const std::string& out_path) {
  const std::optional<std::string> cls =
      opt.class_column.empty() ? std::nullopt
                               : std::optional<std::string>(opt.class_column);
  if (!cls && targets.empty())
    throw figmn::ConfigError("eval needs --class (accuracy) or --targets (RMSE)");
  figmn::Dataset ds = figmn::load_csv(opt.data_path, cls);
  figmn::Dataset enc = cls ? figmn::one_hot(ds) : ds;
  const int dim = enc.cols();
  const int labels = cls ? static_cast<int>(enc.class_labels.size()) : 0;
  const int feature_count = cls ? dim - labels : dim;

  std::vector<int> target_idx;
  if (cls) {
    for (int l = 0; l < labels; ++l) target_idx.push_back(dim - labels + l);
  } else {
    target_idx = resolve_columns(targets, enc.column_names);
  }
  const figmn::Partition part = figmn::make_partition(dim, target_idx);

  const figmn::FoldPlan plan = figmn::stratified_kfold(ds, folds, opt.seed);
  const bool fast = opt.learner == "fast";

  std::vector<double> fold_metric, fold_components;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows_idx, test_rows_idx;
    for (int r = 0; r < enc.n(); ++r)
      (plan.fold_of_row[r] == f ? test_rows_idx : train_rows_idx).push_back(r);

    Mat rows = enc.rows;
    std::optional<figmn::Standardizer> st;
    if (opt.standardize) {
      const auto train_stats = figmn::column_stats(rows, &train_rows_idx);
      st = make_standardizer(train_stats, feature_count, dim);
      for (Eigen::Index r = 0; r < rows.rows(); ++r)
        rows.row(r) =
            apply_standardizer(*st, rows.row(r).transpose()).transpose();
    }
    const auto stats = figmn::column_stats(rows, &train_rows_idx);
    const figmn::Mixture mix =
        train_rows(build_config(opt, stats.stddev), rows, train_rows_idx, fast);

    if (cls) {
      int correct = 0;
      for (int r : test_rows_idx) {
        Vec x_i(part.known_idx.size());
        for (std::size_t i = 0; i < part.known_idx.size(); ++i)
          x_i[static_cast<Eigen::Index>(i)] = rows(r, part.known_idx[i]);
        const auto cl = figmn::classify(mix, part, x_i, labels);
        const int truth = static_cast<int>(ds.rows(r, *ds.class_column));
        if (cl.label == truth) ++correct;
      }
      fold_metric.push_back(static_cast<double>(correct) /
                            static_cast<double>(test_rows_idx.size()));
    } else {
      double se = 0.0;
      std::size_t count = 0;
      for (int r : test_rows_idx) {
        Vec x_i(part.known_idx.size());
        for (std::size_t i = 0; i < part.known_idx.size(); ++i)
          x_i[static_cast<Eigen::Index>(i)] = rows(r, part.known_idx[i]);
        const auto pred = figmn::predict(mix, part, x_i);
        for (std::size_t t = 0; t < target_idx.size(); ++t) {
          const double diff =
              pred.target_mean[static_cast<Eigen::Index>(t)] -
              rows(r, target_idx[t]);
          se += diff * diff;
          ++count;
        }
      }
      fold_metric.push_back(std::sqrt(se / static_cast<double>(count)));
    }
    fold_components.push_back(static_cast<double>(mix.size()));
  }

  const auto mean_of = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
  };
  const auto std_of = [&](const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
  };

  const char* metric_name = cls ? "accuracy" : "rmse";
  std::ofstream file;
  std::ostream& out = open_report(out_path, file);
  out << "fold," << metric_name << ",components\n";
  for (int f = 0; f < folds; ++f)
    out << f << ',' << figmn::format_real(fold_metric[f]) << ','
        << figmn::format_real(fold_components[f]) << '\n';
  out << "mean," << figmn::format_real(mean_of(fold_metric)) << ','
      << figmn::format_real(mean_of(fold_components)) << '\n';
  out << "std," << figmn::format_real(std_of(fold_metric)) << ','
      << figmn::format_real(std_of(fold_components)) << '\n';
  std::cerr << "eval " << metric_name << "=" << mean_of(fold_metric) << " +- "
            << std_of(fold_metric)
            << " components=" << mean_of(fold_components) << '\n';
  return 0;
}

int cmd_bench(const std::string& dims_spec, int n_points, std::uint64_t seed,
              const std::string& learners, int reps,
              const std::string& out_path) {
  figmn::bench::ScalingConfig cfg;
  cfg.n_points = n_points;
  cfg.seed = seed;
  cfg.repetitions = reps;
  if (!dims_spec.empty()) {
    cfg.dims.clear();
    std::stringstream ss(dims_spec);
    std::string token;
    while (std::getline(ss, token, ','))
      if (!token.empty()) cfg.dims.push_back(std::stoi(token));
  }
  cfg.run_fast = learners.find("fast") != std::string::npos;
  cfg.run_reference = learners.find("reference") != std::string::npos;

  const auto rows = figmn::bench::run_scaling(cfg);
  std::ofstream file;
  std::ostream& out = open_report(out_path, file);
  figmn::bench::write_scaling_csv(rows, out);
  for (const char* learner : {"fast", "reference"}) {
    if ((learner == std::string("fast") && !cfg.run_fast) ||
        (learner == std::string("reference") && !cfg.run_reference))
      continue;
    try {
      std::cerr << "exponent " << learner << "="
                << figmn::bench::fit_exponent(rows, learner) << '\n';
    } catch (const figmn::ConfigError& e) {
      std::cerr << "exponent " << learner << ": " << e.what() << '\n';
    }
  }
  return 0;
}

int cmd_rl(const std::string& task_name, std::uint64_t seed, int episodes,
           const figmn::rl::AgentConfig& base, const std::string& out_path) {
  const figmn::rl::Task task = task_name == "cart_pole"
                                   ? figmn::rl::Task::cart_pole
                                   : figmn::rl::Task::mountain_car;
  const figmn::rl::EnvSpec env = figmn::rl::make_env(task);
  figmn::rl::AgentConfig cfg = base;
  if (episodes > 0) cfg.episode_cap = episodes;

  const auto result = figmn::rl::run_task(env, cfg, seed);
  std::ofstream file;
  std::ostream& out = open_report(out_path, file);
  figmn::rl::write_episode_csv(result, out);
  if (result.solved())
    std::cerr << "solved after " << result.episodes_to_solve << " episodes\n";
  else
    std::cerr << "unsolved within " << cfg.episode_cap << " episodes\n";
  if (result.first_goal_episode >= 0)
    std::cerr << "first goal episode " << result.first_goal_episode << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental Gaussian mixture learning toolkit"};
  app.require_subcommand(1);

  TrainOptions train_opt;
  std::string out_path;
  auto* train = app.add_subcommand("train", "single-pass training, writes a model file");
  add_train_flags(train, train_opt);
  train->add_option("--out", out_path, "model output path")->required();

  std::string model_path, predict_data, predict_targets, predict_out;
  auto* predict = app.add_subcommand("predict", "conditional-mean prediction CSV");
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--data", predict_data, "numeric CSV matching the model dimension")->required();
  predict->add_option("--targets", predict_targets, "target columns (names or indices, comma-separated)")->required();
  predict->add_option("--out", predict_out, "report path (default stdout)");

  TrainOptions eval_opt;
  int folds = 10;
  std::string eval_targets, eval_out;
  auto* eval = app.add_subcommand("eval", "k-fold cross-validated accuracy or RMSE");
  add_train_flags(eval, eval_opt);
  eval->add_option("--folds", folds, "number of folds (>= 2)");
  eval->add_option("--targets", eval_targets, "regression target columns");
  eval->add_option("--out", eval_out, "report path (default stdout)");

  std::string bench_dims, bench_learners = "fast,reference", bench_out;
  int bench_n = 1000, bench_reps = 3;
  std::uint64_t bench_seed = 1;
  auto* bench = app.add_subcommand("bench", "dimensionality-scaling benchmark CSV");
  bench->add_option("--dims", bench_dims, "comma-separated dimensions (default 1,2,...,256)");
  bench->add_option("--n", bench_n, "points per dataset");
  bench->add_option("--seed", bench_seed, "dataset seed");
  bench->add_option("--learners", bench_learners, "subset of fast,reference");
  bench->add_option("--reps", bench_reps, "timing repetitions (median)");
  bench->add_option("--out", bench_out, "report path (default stdout)");

  std::string rl_task = "cart_pole", rl_out;
  std::uint64_t rl_seed = 1;
  int rl_episodes = 0;
  figmn::rl::AgentConfig rl_cfg =
      figmn::rl::default_agent_config(figmn::rl::make_env(figmn::rl::Task::cart_pole));
  auto* rl = app.add_subcommand("rl", "Q-learning demonstration, per-episode CSV");
  rl->add_option("--task", rl_task, "cart_pole | mountain_car")
      ->check(CLI::IsMember({"cart_pole", "mountain_car"}));
  rl->add_option("--seed", rl_seed, "run seed");
  rl->add_option("--episodes", rl_episodes, "episode cap (default per task)");
  rl->add_option("--gamma", rl_cfg.gamma, "discount factor");
  rl->add_option("--epsilon-start", rl_cfg.epsilon_start, "initial exploration rate");
  rl->add_option("--epsilon-decay", rl_cfg.epsilon_decay, "per-episode decay");
  rl->add_option("--epsilon-floor", rl_cfg.epsilon_floor, "exploration floor");
  rl->add_option("--delta", rl_cfg.delta, "learner sigma_ini scaling");
  rl->add_option("--q-std", rl_cfg.q_std, "action-value scale estimate");
  rl->add_flag("--random-policy", rl_cfg.random_policy, "random-action baseline (no learning)");
  rl->add_option("--out", rl_out, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_opt, out_path);
    if (predict->parsed())
      return cmd_predict(model_path, predict_data, predict_targets, predict_out);
    if (eval->parsed()) return cmd_eval(eval_opt, folds, eval_targets, eval_out);
    if (bench->parsed())
      return cmd_bench(bench_dims, bench_n, bench_seed, bench_learners,
                       bench_reps, bench_out);
    if (rl->parsed()) {
      if (rl_task == "mountain_car" && rl_episodes == 0 &&
          rl->count("--episodes") == 0)
        rl_cfg.episode_cap = figmn::rl::default_agent_config(
                                 figmn::rl::make_env(figmn::rl::Task::mountain_car))
                                 .episode_cap;
      return cmd_rl(rl_task, rl_seed, rl_episodes, rl_cfg, rl_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
