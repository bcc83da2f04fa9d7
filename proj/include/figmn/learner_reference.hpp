#pragma once

#include <Eigen/Cholesky>

#include "figmn/model.hpp"

// The O(D^3)-per-step covariance-form learner. It is the correctness
// reference for the fast precision-form learner: distances go through a dense
// symmetric solve and the determinant is recomputed densely on every step.

namespace figmn {

// (x - mu)^T Sigma^-1 (x - mu) via an LDLT solve; no explicit inverse.
inline double mahalanobis_dense(const GaussianComponent& comp, const Vec& x) {
  if (comp.cov.size() == 0)
    throw std::invalid_argument(
        "mahalanobis_dense: covariance representation required");
  if (x.size() != comp.mean.size())
    throw std::invalid_argument("mahalanobis_dense: dimension mismatch");
  Eigen::LDLT<Mat> ldlt(comp.cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw DegenerateComponent("mahalanobis_dense: covariance not SPD");
  const Vec e = x - comp.mean;
  const double d2 = e.dot(ldlt.solve(e));
  return d2 > 0.0 ? d2 : 0.0;
}

// Sigma(t) = (1-omega) Sigma(t-1) + omega e* e*^T - dmu dmu^T, with the
// determinant recomputed densely. Returns false (state untouched) when the
// shared guard fails or the updated matrix is no longer positive definite,
// which happens when omega is large and the point is far away: the subtracted
// dmu dmu^T term can then dominate.
inline bool covariance_update(GaussianComponent& comp, const Vec& e_star,
                              const Vec& mean_shift, double omega,
                              double guard_g) {
  if (comp.cov.size() == 0)
    throw std::invalid_argument(
        "covariance_update: covariance representation required");
  if (!(guard_g > kGuardEpsilon)) return false;
  Mat updated = (1.0 - omega) * comp.cov;
  updated += omega * (e_star * e_star.transpose());
  updated -= mean_shift * mean_shift.transpose();
  symmetrize(updated);
  Eigen::LDLT<Mat> ldlt(updated);
  if (ldlt.info() != Eigen::Success) return false;
  const double det = ldlt.vectorD().prod();
  if (!(det > 0.0) || !std::isfinite(det)) return false;
  comp.cov = std::move(updated);
  comp.det_cov = det;
  return true;
}

// Full learning step: dense distances, novelty check, create-or-update,
// priors, optional pruning.
inline UpdateTrace step_reference(Mixture& mix, const Vec& x) {
  if (mix.config.representation != Representation::covariance)
    throw ConfigError("step_reference: covariance representation required");
  return detail::step(
      mix, x,
      [](const GaussianComponent& comp, const Vec& point) {
        return mahalanobis_dense(comp, point);
      },
      [](GaussianComponent& comp, const Vec&, const Vec& e_star,
         const Vec& shift, double omega, double g) {
        return covariance_update(comp, e_star, shift, omega, g);
      });
}

}  // namespace figmn
