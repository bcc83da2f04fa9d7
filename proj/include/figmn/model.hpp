#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "figmn/errors.hpp"
#include "figmn/numerics.hpp"

// Mixture data model shared by both learners: configuration, component
// lifecycle (creation, pruning, prior renormalization), density and
// responsibility evaluation, and novelty testing.

namespace figmn {

enum class Representation { covariance, precision };

// Zero-variance dataset columns are floored here so the diagonal precision
// initialization stays finite.
inline constexpr double kStdFloor = 1e-9;

struct LearnerConfig {
  double delta = 0.5;  // sigma_ini scaling factor
  double beta = std::numeric_limits<double>::denorm_min();  // novelty percentile
  std::int64_t v_min = 5;   // pruning age threshold
  double sp_min = 3.0;      // pruning accumulator threshold
  bool pruning_enabled = true;
  Vec dataset_std;          // per-dimension standard-deviation estimate
  int dimension = 0;        // filled by finalize_config
  double chi2_threshold = std::numeric_limits<double>::infinity();
  Representation representation = Representation::precision;
};

// Validates a config, floors dataset_std, and caches the novelty threshold
// chi2(D, 1 - beta). beta = 0 maps to an infinite threshold (a single
// component is ever created); beta small enough that 1 - beta rounds to 1 is
// clamped to the largest representable percentile.
inline LearnerConfig finalize_config(LearnerConfig cfg) {
  if (cfg.dataset_std.size() == 0)
    throw ConfigError("learner config: dataset_std must be non-empty");
  if (!(cfg.delta > 0.0))
    throw ConfigError("learner config: delta must be > 0");
  if (!(cfg.beta >= 0.0 && cfg.beta < 1.0))
    throw ConfigError("learner config: beta must lie in [0, 1)");
  if (cfg.v_min < 1)
    throw ConfigError("learner config: v_min must be a positive integer");
  if (!(cfg.sp_min > 0.0))
    throw ConfigError("learner config: sp_min must be > 0");
  cfg.dimension = static_cast<int>(cfg.dataset_std.size());
  for (Eigen::Index i = 0; i < cfg.dataset_std.size(); ++i) {
    if (!std::isfinite(cfg.dataset_std[i]) || cfg.dataset_std[i] < 0.0)
      throw ConfigError("learner config: dataset_std entries must be finite");
    if (cfg.dataset_std[i] < kStdFloor) cfg.dataset_std[i] = kStdFloor;
  }
  cfg.chi2_threshold =
      (cfg.beta == 0.0)
          ? std::numeric_limits<double>::infinity()
          : chi2_quantile(cfg.dimension,
                          std::min(1.0 - cfg.beta, kMaxProbability));
  return cfg;
}

// One mixture component. Exactly one of cov/prec is populated, per the
// mixture's representation tag; the covariance determinant is tracked under
// both representations.
struct GaussianComponent {
  Vec mean;
  Mat cov;
  Mat prec;
  double det_cov = 1.0;
  double sp = 1.0;
  std::int64_t age = 1;
  double prior = 1.0;
};

struct Mixture {
  LearnerConfig config;
  std::vector<GaussianComponent> components;
  std::uint64_t skipped_updates = 0;  // guard-triggered matrix-update skips

  Mixture() = default;
  explicit Mixture(LearnerConfig cfg) : config(finalize_config(std::move(cfg))) {}

  int dimension() const { return config.dimension; }
  std::size_t size() const { return components.size(); }
};

// Per-step transient values exposed for testing. Component-indexed entries
// are only populated on update steps.
struct UpdateTrace {
  Vec d2;
  Vec log_density;
  Vec responsibility;
  Vec omega;
  Vec coeff_c;   // omega (1 - 3 omega + omega^2), the combined rank-one weight
  Vec guard_g;   // 1 + coeff_c / (1 - omega) * d2, the shared skip guard
  std::vector<Vec> error_before;  // e   = x - mean(t-1)
  std::vector<Vec> error_after;   // e*  = x - mean(t)
  std::vector<Vec> mean_shift;    // omega e
  std::vector<char> skipped;
  bool created = false;
  bool updated = false;
  std::vector<int> pruned_ids;
};

// ln p(x|j) from the tracked determinant and a precomputed squared
// Mahalanobis distance; stays finite where the linear-domain density
// underflows.
inline double log_density(const GaussianComponent& comp, double d2, int dim) {
  if (!(comp.det_cov > 0.0))
    throw DegenerateComponent("log_density: non-positive determinant");
  return -0.5 * dim * kLog2Pi - 0.5 * std::log(comp.det_cov) - 0.5 * d2;
}

// Posterior p(j|x): softmax of log-density + log-prior, normalized in the log
// domain. If every term underflows to -inf the nearest component by squared
// distance takes responsibility 1 (the limit of the softmax).
inline Vec responsibilities(const Mixture& mix, const Vec& log_densities,
                            const Vec& d2) {
  const auto k = static_cast<Eigen::Index>(mix.components.size());
  if (k == 0) throw std::invalid_argument("responsibilities: empty mixture");
  if (log_densities.size() != k || d2.size() != k)
    throw std::invalid_argument("responsibilities: dimension mismatch");
  Vec logits(k);
  for (Eigen::Index j = 0; j < k; ++j)
    logits[j] = log_densities[j] + std::log(mix.components[j].prior);
  const double norm = log_sum_exp(logits);
  if (!std::isfinite(norm)) {
    Vec r = Vec::Zero(k);
    Eigen::Index nearest = 0;
    d2.minCoeff(&nearest);
    r[nearest] = 1.0;
    return r;
  }
  Vec r(k);
  for (Eigen::Index j = 0; j < k; ++j) r[j] = std::exp(logits[j] - norm);
  r /= r.sum();
  return r;
}

// True ("update") iff some distance beats the threshold; false means "create
// a new component". An empty mixture always creates; an infinite threshold
// (beta = 0) never creates past the first component.
inline bool novelty_check(const Vec& d2, double threshold) {
  if (d2.size() == 0) return false;
  if (std::isinf(threshold) && threshold > 0.0) return true;
  for (Eigen::Index j = 0; j < d2.size(); ++j)
    if (d2[j] < threshold) return true;
  return false;
}

inline void renormalize_priors(Mixture& mix) {
  if (mix.components.empty())
    throw std::invalid_argument("renormalize_priors: empty mixture");
  double total = 0.0;
  for (const auto& comp : mix.components) total += comp.sp;
  for (auto& comp : mix.components) comp.prior = comp.sp / total;
}

// Appends a component centered on x with the diagonal sigma_ini
// initialization (covariance delta^2 std^2, precision its inverse), then
// recomputes every prior. Returns the new component's index.
inline int create_component(Mixture& mix, const Vec& x) {
  const auto& cfg = mix.config;
  if (x.size() != cfg.dimension)
    throw std::invalid_argument("create_component: dimension mismatch");
  GaussianComponent comp;
  comp.mean = x;
  comp.sp = 1.0;
  comp.age = 1;
  Vec var(cfg.dimension);
  double det = 1.0;
  for (int i = 0; i < cfg.dimension; ++i) {
    const double s = cfg.delta * cfg.dataset_std[i];
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConfigError("create_component: nonpositive sigma_ini entry");
    var[i] = s * s;
    det *= var[i];
  }
  comp.det_cov = det;
  if (cfg.representation == Representation::covariance) {
    comp.cov = Mat::Zero(cfg.dimension, cfg.dimension);
    comp.cov.diagonal() = var;
  } else {
    comp.prec = Mat::Zero(cfg.dimension, cfg.dimension);
    comp.prec.diagonal() = var.cwiseInverse();
  }
  mix.components.push_back(std::move(comp));
  renormalize_priors(mix);
  return static_cast<int>(mix.components.size()) - 1;
}

// Removes every component with age > v_min and sp < sp_min (outliers are
// dropped, never merged), then readjusts the remaining priors. Removing all
// components is a legal outcome.
inline std::vector<int> prune(Mixture& mix) {
  const auto& cfg = mix.config;
  std::vector<int> removed;
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    const auto& comp = mix.components[j];
    if (comp.age > cfg.v_min && comp.sp < cfg.sp_min)
      removed.push_back(static_cast<int>(j));
  }
  if (removed.empty()) return removed;
  std::vector<GaussianComponent> kept;
  kept.reserve(mix.components.size() - removed.size());
  std::size_t next_removed = 0;
  for (std::size_t j = 0; j < mix.components.size(); ++j) {
    if (next_removed < removed.size() &&
        static_cast<int>(j) == removed[next_removed]) {
      ++next_removed;
      continue;
    }
    kept.push_back(std::move(mix.components[j]));
  }
  mix.components = std::move(kept);
  if (!mix.components.empty()) renormalize_priors(mix);
  return removed;
}

namespace detail {

// One learning step, shared by both learners so their control flow cannot
// diverge. `distance` returns the squared Mahalanobis distance of x to a
// component; `update_matrices` applies the representation-specific
// covariance-or-precision and determinant updates, returning false when it
// skipped them.
//
// Update path per component: age and accumulator first, then
// omega = p(j|x) / sp(t), the mean moved by omega e, and the matrix update on
// the pre-move error e. The guard g = 1 + c/(1-omega) d2 (c the combined
// rank-one weight) is evaluated here once; g <= kGuardEpsilon skips the
// matrix/determinant update for that component while mean, sp and age keep
// their new values.
template <class Distance, class UpdateMatrices>
UpdateTrace step(Mixture& mix, const Vec& x, Distance&& distance,
                 UpdateMatrices&& update_matrices) {
  const int dim = mix.config.dimension;
  if (dim == 0) throw ConfigError("step: mixture has no configuration");
  if (x.size() != dim)
    throw std::invalid_argument("step: input dimension mismatch");

  UpdateTrace trace;
  const auto k = static_cast<Eigen::Index>(mix.components.size());
  trace.d2.resize(k);
  for (Eigen::Index j = 0; j < k; ++j)
    trace.d2[j] = distance(mix.components[j], x);

  if (!novelty_check(trace.d2, mix.config.chi2_threshold)) {
    create_component(mix, x);
    trace.created = true;
  } else {
    trace.updated = true;
    trace.log_density.resize(k);
    for (Eigen::Index j = 0; j < k; ++j)
      trace.log_density[j] =
          log_density(mix.components[j], trace.d2[j], dim);
    trace.responsibility = responsibilities(mix, trace.log_density, trace.d2);
    trace.omega.resize(k);
    trace.coeff_c.resize(k);
    trace.guard_g.resize(k);
    trace.error_before.resize(k);
    trace.error_after.resize(k);
    trace.mean_shift.resize(k);
    trace.skipped.assign(k, 0);

    for (Eigen::Index j = 0; j < k; ++j) {
      auto& comp = mix.components[j];
      const double p = trace.responsibility[j];
      comp.age += 1;
      comp.sp += p;
      const double omega = p / comp.sp;  // sp(t-1) >= 1 keeps omega <= 1/2
      const Vec e = x - comp.mean;
      const Vec shift = omega * e;
      comp.mean += shift;
      const Vec e_star = x - comp.mean;
      const double c = omega * (1.0 - 3.0 * omega + omega * omega);
      const double g = 1.0 + c / (1.0 - omega) * trace.d2[j];
      trace.omega[j] = omega;
      trace.coeff_c[j] = c;
      trace.guard_g[j] = g;
      trace.error_before[j] = e;
      trace.error_after[j] = e_star;
      trace.mean_shift[j] = shift;
      const bool applied =
          g > kGuardEpsilon && update_matrices(comp, e, e_star, shift, omega, g);
      if (!applied) {
        trace.skipped[j] = 1;
        ++mix.skipped_updates;
      }
    }
    renormalize_priors(mix);
  }
  if (mix.config.pruning_enabled) trace.pruned_ids = prune(mix);
  return trace;
}

}  // namespace detail

}  // namespace figmn
