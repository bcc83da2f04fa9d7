#pragma once

#include <Eigen/Cholesky>
#include <vector>

#include "figmn/model.hpp"

// Conditional inference on a trained mixture: posterior over components given
// a partial input, conditional mean reconstruction, conditional covariance,
// and classification/regression wrappers. Works under both representations;
// the precision path never reconstructs the covariance matrix, it uses the
// block identities
//   Sigma_i^-1   = Lambda_i - Lambda_it Lambda_t^-1 Lambda_ti
//   det Sigma_i  = det Sigma * det Lambda_t
//   cond. mean   = mu_t - Lambda_t^-1 Lambda_ti (x_i - mu_i)
//   cond. cov    = Lambda_t^-1          (Schur complement of Sigma_i)
// keeping inference at O(D^2 o + o^3) for o target dimensions.

namespace figmn {

// Index split into known ("input") dimensions i and unknown ("target")
// dimensions t. Disjoint, jointly covering 0..D-1; targets may be empty for
// marginal evaluation but must be nonempty for prediction.
struct Partition {
  std::vector<int> known_idx;
  std::vector<int> target_idx;
};

inline void validate_partition(const Partition& part, int dim) {
  std::vector<char> seen(static_cast<std::size_t>(dim), 0);
  auto mark = [&](const std::vector<int>& idx) {
    for (int i : idx) {
      if (i < 0 || i >= dim)
        throw std::invalid_argument("partition: index out of range");
      if (seen[static_cast<std::size_t>(i)])
        throw std::invalid_argument("partition: duplicate index");
      seen[static_cast<std::size_t>(i)] = 1;
    }
  };
  mark(part.known_idx);
  mark(part.target_idx);
  if (part.known_idx.size() + part.target_idx.size() !=
      static_cast<std::size_t>(dim))
    throw std::invalid_argument("partition: must cover every dimension");
}

// Partition with the given targets; the known block is the ascending
// complement.
inline Partition make_partition(int dim, std::vector<int> target_idx) {
  Partition part;
  part.target_idx = std::move(target_idx);
  std::vector<char> is_target(static_cast<std::size_t>(dim), 0);
  for (int t : part.target_idx) {
    if (t < 0 || t >= dim)
      throw std::invalid_argument("partition: target index out of range");
    if (is_target[static_cast<std::size_t>(t)])
      throw std::invalid_argument("partition: duplicate target index");
    is_target[static_cast<std::size_t>(t)] = 1;
  }
  for (int i = 0; i < dim; ++i)
    if (!is_target[static_cast<std::size_t>(i)]) part.known_idx.push_back(i);
  return part;
}

struct Prediction {
  Vec target_mean;
  Mat target_cov;  // posterior-weighted law-of-total-variance aggregate
  Vec component_posteriors;
  std::vector<Vec> component_means;  // per-component conditional moments
  std::vector<Mat> component_covs;
};

namespace detail {

inline Mat select_block(const Mat& m, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          m(rows[r], cols[c]);
  return out;
}

inline Vec select(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

struct MarginalStats {
  double d2 = 0.0;           // squared Mahalanobis distance on the known block
  double log_det = 0.0;      // ln det of the known-block covariance
};

inline MarginalStats marginal_stats(const GaussianComponent& comp,
                                    const Partition& part, const Vec& x_i) {
  const auto ni = static_cast<Eigen::Index>(part.known_idx.size());
  if (x_i.size() != ni)
    throw std::invalid_argument("marginal: known-vector dimension mismatch");
  MarginalStats out;
  if (ni == 0) return out;  // no evidence: unit likelihood
  const Vec e_i = x_i - select(comp.mean, part.known_idx);

  if (comp.prec.size() != 0) {
    const auto no = static_cast<Eigen::Index>(part.target_idx.size());
    if (no == 0) {
      // degenerate partition: the marginal is the full density
      out.d2 = quadratic_form(comp.prec, e_i);
      out.log_det = std::log(comp.det_cov);
      return out;
    }
    const Mat lam_i = select_block(comp.prec, part.known_idx, part.known_idx);
    const Mat lam_it =
        select_block(comp.prec, part.known_idx, part.target_idx);
    const Mat lam_t =
        select_block(comp.prec, part.target_idx, part.target_idx);
    Eigen::LDLT<Mat> ldlt(lam_t);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw DegenerateComponent("marginal: target precision block not SPD");
    const double det_lam_t = ldlt.vectorD().prod();
    if (!(det_lam_t > 0.0))
      throw DegenerateComponent("marginal: target precision block singular");
    Mat p_i = lam_i - lam_it * ldlt.solve(lam_it.transpose());
    symmetrize(p_i);
    const double d2 = e_i.dot(p_i * e_i);
    out.d2 = d2 > 0.0 ? d2 : 0.0;
    out.log_det = std::log(comp.det_cov) + std::log(det_lam_t);
    return out;
  }

  if (comp.cov.size() == 0)
    throw std::invalid_argument("marginal: component has no matrix");
  const Mat sig_i = select_block(comp.cov, part.known_idx, part.known_idx);
  Eigen::LDLT<Mat> ldlt(sig_i);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DegenerateComponent("marginal: known covariance block not SPD");
  const double d2 = e_i.dot(ldlt.solve(e_i));
  out.d2 = d2 > 0.0 ? d2 : 0.0;
  out.log_det = ldlt.vectorD().array().log().sum();
  return out;
}

}  // namespace detail

// ln of the Gaussian marginal on the known block.
inline double marginal_log_density(const GaussianComponent& comp,
                                   const Partition& part, const Vec& x_i) {
  const auto stats = detail::marginal_stats(comp, part, x_i);
  const auto ni = static_cast<double>(part.known_idx.size());
  return -0.5 * ni * kLog2Pi - 0.5 * stats.log_det - 0.5 * stats.d2;
}

// Posterior p(j | x_i): softmax of marginal log-densities plus log priors.
// All-underflow inputs fall back to the nearest component by marginal
// distance, as in responsibilities().
inline Vec posterior_given_known(const Mixture& mix, const Partition& part,
                                 const Vec& x_i) {
  const auto k = static_cast<Eigen::Index>(mix.components.size());
  if (k == 0)
    throw std::invalid_argument("posterior_given_known: empty mixture");
  Vec logits(k), d2(k);
  const auto ni = static_cast<double>(part.known_idx.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto stats = detail::marginal_stats(mix.components[j], part, x_i);
    d2[j] = stats.d2;
    logits[j] = -0.5 * ni * kLog2Pi - 0.5 * stats.log_det - 0.5 * stats.d2 +
                std::log(mix.components[j].prior);
  }
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

struct ConditionalMoments {
  Vec mean;
  Mat cov;
};

// Conditional mean and covariance of the target block given the known block.
// Precision path: mean = mu_t - Lambda_t^-1 Lambda_ti e_i, cov = Lambda_t^-1.
// Covariance path: mean = mu_t + Sigma_ti Sigma_i^-1 e_i, cov the Schur
// complement. The two paths agree (property-tested).
inline ConditionalMoments conditional_moments(const GaussianComponent& comp,
                                              const Partition& part,
                                              const Vec& x_i) {
  const auto ni = static_cast<Eigen::Index>(part.known_idx.size());
  const auto no = static_cast<Eigen::Index>(part.target_idx.size());
  if (no == 0)
    throw std::invalid_argument("conditional_moments: empty target block");
  if (x_i.size() != ni)
    throw std::invalid_argument("conditional_moments: dimension mismatch");
  ConditionalMoments out;
  const Vec mu_t = detail::select(comp.mean, part.target_idx);

  if (comp.prec.size() != 0) {
    const Mat lam_t =
        detail::select_block(comp.prec, part.target_idx, part.target_idx);
    Eigen::LDLT<Mat> ldlt(lam_t);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw DegenerateComponent(
          "conditional_moments: target precision block not SPD");
    out.cov = ldlt.solve(Mat::Identity(no, no));
    symmetrize(out.cov);
    if (ni == 0) {
      out.mean = mu_t;
      return out;
    }
    const Mat lam_ti =
        detail::select_block(comp.prec, part.target_idx, part.known_idx);
    const Vec e_i = x_i - detail::select(comp.mean, part.known_idx);
    out.mean = mu_t - ldlt.solve(lam_ti * e_i);
    return out;
  }

  if (comp.cov.size() == 0)
    throw std::invalid_argument("conditional_moments: component has no matrix");
  const Mat sig_t =
      detail::select_block(comp.cov, part.target_idx, part.target_idx);
  if (ni == 0) {
    out.mean = mu_t;
    out.cov = sig_t;
    return out;
  }
  const Mat sig_i =
      detail::select_block(comp.cov, part.known_idx, part.known_idx);
  const Mat sig_it =
      detail::select_block(comp.cov, part.known_idx, part.target_idx);
  Eigen::LDLT<Mat> ldlt(sig_i);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DegenerateComponent(
        "conditional_moments: known covariance block not SPD");
  const Vec e_i = x_i - detail::select(comp.mean, part.known_idx);
  out.mean = mu_t + sig_it.transpose() * ldlt.solve(e_i);
  out.cov = sig_t - sig_it.transpose() * ldlt.solve(sig_it);
  symmetrize(out.cov);
  return out;
}

// Posterior-weighted reconstruction of the target block. target_cov is the
// mixture conditional covariance sum_j p_j (C_j + m_j m_j^T) - m m^T; the
// per-component moments are exposed alongside it.
inline Prediction predict(const Mixture& mix, const Partition& part,
                          const Vec& x_i) {
  const auto k = static_cast<Eigen::Index>(mix.components.size());
  if (k == 0) throw std::invalid_argument("predict: empty mixture");
  const auto no = static_cast<Eigen::Index>(part.target_idx.size());
  if (no == 0) throw std::invalid_argument("predict: empty target block");

  Prediction out;
  out.component_posteriors = posterior_given_known(mix, part, x_i);
  out.component_means.reserve(k);
  out.component_covs.reserve(k);
  out.target_mean = Vec::Zero(no);
  Mat second_moment = Mat::Zero(no, no);
  for (Eigen::Index j = 0; j < k; ++j) {
    auto moments = conditional_moments(mix.components[j], part, x_i);
    const double p = out.component_posteriors[j];
    out.target_mean += p * moments.mean;
    second_moment +=
        p * (moments.cov + moments.mean * moments.mean.transpose());
    out.component_means.push_back(std::move(moments.mean));
    out.component_covs.push_back(std::move(moments.cov));
  }
  out.target_cov =
      second_moment - out.target_mean * out.target_mean.transpose();
  symmetrize(out.target_cov);
  return out;
}

struct Classification {
  int label = 0;
  Vec scores;
};

// One-hot classification: the predicted target mean is the score vector and
// the label is its argmax, ties broken toward the lowest index.
inline Classification classify(const Mixture& mix, const Partition& part,
                               const Vec& x_i, int class_count) {
  if (static_cast<int>(part.target_idx.size()) != class_count)
    throw std::invalid_argument(
        "classify: target block size must equal class_count");
  Classification out;
  out.scores = predict(mix, part, x_i).target_mean;
  out.label = 0;
  for (int c = 1; c < class_count; ++c)
    if (out.scores[c] > out.scores[out.label]) out.label = c;
  return out;
}

}  // namespace figmn
