#pragma once

#include "figmn/model.hpp"

// The O(D^2)-per-step precision-form learner: rank-one precision and
// determinant updates with no matrix inversion, solve, or dense determinant
// anywhere in the learning loop.

namespace figmn {

// Direct substitution of the precision matrix in the Mahalanobis form:
// (x - mu)^T Lambda (x - mu). Exact, no inversion.
inline double mahalanobis_precision(const GaussianComponent& comp,
                                    const Vec& x) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "mahalanobis_precision: precision representation required");
  if (x.size() != comp.mean.size())
    throw std::invalid_argument("mahalanobis_precision: dimension mismatch");
  return quadratic_form(comp.prec, x - comp.mean);
}

// Combined rank-one precision update, the Sherman-Morrison inverse of
//   Sigma(t) = (1-omega) Sigma(t-1) + c e e^T,  c = omega (1 - 3 omega + omega^2):
//   Lambda(t) = Lambda/(1-omega) - [c/(1-omega)^2] (Lambda e)(Lambda e)^T / g,
//   g = 1 + c/(1-omega) e^T Lambda e.
// Returns false without touching the component when g <= kGuardEpsilon
// (mirrors the reference learner's skip). e is the pre-update error
// x - mean(t-1).
inline bool precision_update_combined(GaussianComponent& comp, const Vec& e,
                                      double omega) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "precision_update_combined: precision representation required");
  if (!(omega >= 0.0 && omega <= 0.5))
    throw std::invalid_argument(
        "precision_update_combined: omega must lie in [0, 0.5]");
  const double den = 1.0 - omega;
  const double c = omega * (1.0 - 3.0 * omega + omega * omega);
  const Vec w = comp.prec * e;
  const double g = 1.0 + c / den * e.dot(w);
  if (!(g > kGuardEpsilon)) return false;
  comp.prec = comp.prec / den - (c / (den * den * g)) * (w * w.transpose());
  symmetrize(comp.prec);
  return true;
}

// Two-step precision update (decay + add omega e* e*^T, then subtract
// dmu dmu^T), each step a plain Sherman-Morrison application. Retained as a
// validation path for the combined form; not used in the learning loop.
// Throws SingularUpdate when an intermediate denominator vanishes.
inline void precision_update_two_step(GaussianComponent& comp,
                                      const Vec& e_star, const Vec& mean_shift,
                                      double omega) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "precision_update_two_step: precision representation required");
  const double den = 1.0 - omega;
  const Mat lam_bar = sm_rank_one(comp.prec / den, e_star, omega);
  comp.prec = sm_rank_one(lam_bar, mean_shift, -1.0);
}

// Combined determinant update via the matrix determinant lemma:
//   det(t) = (1-omega)^D det(t-1) (1 + c/(1-omega) e^T Lambda(t-1) e).
// Ordering contract: reads the precision matrix BEFORE the precision update
// (the parenthesized factor is the same guard g). Returns false on guard
// failure, paired with the precision skip.
inline bool determinant_update_combined(GaussianComponent& comp, const Vec& e,
                                        double omega) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "determinant_update_combined: precision representation required");
  if (!(omega >= 0.0 && omega <= 0.5))
    throw std::invalid_argument(
        "determinant_update_combined: omega must lie in [0, 0.5]");
  const double den = 1.0 - omega;
  const double c = omega * (1.0 - 3.0 * omega + omega * omega);
  const double g = 1.0 + c / den * quadratic_form(comp.prec, e);
  if (!(g > kGuardEpsilon)) return false;
  const auto dim = comp.mean.size();
  const double det =
      std::pow(den, static_cast<double>(dim)) * comp.det_cov * g;
  if (!(det > 0.0) || !std::isfinite(det)) return false;
  comp.det_cov = det;
  return true;
}

// Two-step determinant analogue (determinant lemma applied per rank-one
// factor). Needs the intermediate precision matrix from the first step, which
// it derives internally; the component's precision matrix is left untouched.
// Validation path only.
inline void determinant_update_two_step(GaussianComponent& comp,
                                        const Vec& e_star,
                                        const Vec& mean_shift, double omega) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "determinant_update_two_step: precision representation required");
  const double den = 1.0 - omega;
  const auto dim = comp.mean.size();
  const Mat lam_scaled = comp.prec / den;
  const double det_bar =
      det_rank_one(std::pow(den, static_cast<double>(dim)) * comp.det_cov,
                   lam_scaled, e_star, omega);
  const Mat lam_bar = sm_rank_one(lam_scaled, e_star, omega);
  comp.det_cov = det_rank_one(det_bar, lam_bar, mean_shift, -1.0);
}

// Variant of the combined precision update whose correction term carries a
// data-independent denominator, (omega-1)^2 (omega^2 - 2 omega - 1), instead
// of the Sherman-Morrison guard. It does NOT track the exact two-step update;
// it exists only so tests can quantify the disagreement. Never called by the
// learning loop.
inline void precision_update_combined_fixed_denom(GaussianComponent& comp,
                                                  const Vec& e, double omega) {
  if (comp.prec.size() == 0)
    throw std::invalid_argument(
        "precision_update_combined_fixed_denom: precision representation "
        "required");
  const double c = omega * (1.0 - 3.0 * omega + omega * omega);
  const double den =
      (omega - 1.0) * (omega - 1.0) * (omega * omega - 2.0 * omega - 1.0);
  const Vec w = comp.prec * e;
  comp.prec = comp.prec / (1.0 - omega) + (c / den) * (w * w.transpose());
  symmetrize(comp.prec);
}

// Full learning step, identical control flow to step_reference: precision
// distances, determinant update against Lambda(t-1), combined precision
// update, priors, optional pruning. O(K D^2) per point.
inline UpdateTrace step_fast(Mixture& mix, const Vec& x) {
  if (mix.config.representation != Representation::precision)
    throw ConfigError("step_fast: precision representation required");
  return detail::step(
      mix, x,
      [](const GaussianComponent& comp, const Vec& point) {
        return mahalanobis_precision(comp, point);
      },
      [](GaussianComponent& comp, const Vec& e, const Vec&, const Vec&,
         double omega, double) {
        if (!determinant_update_combined(comp, e, omega)) return false;
        return precision_update_combined(comp, e, omega);
      });
}

}  // namespace figmn
