#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "figmn/errors.hpp"

// Representation-agnostic numerical kernels: symmetric rank-one inverse and
// determinant updates, chi-squared quantiles, quadratic forms, and log-domain
// normalization. All functions here are pure.

namespace figmn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Skip guard shared by both learners: a covariance/determinant update whose
// determinant-lemma factor g falls at or below this value is not applied.
inline constexpr double kGuardEpsilon = 1e-8;

// Hard singularity threshold inside the rank-one kernels.
inline constexpr double kSingularEpsilon = 1e-12;

// Largest probability the quantile accepts; anything closer to 1 (e.g. the
// default beta of 4.9e-324, whose complement rounds to 1 in doubles) is
// clamped here so the novelty threshold stays a large finite number.
inline constexpr double kMaxProbability = 1.0 - 1e-12;

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline void symmetrize(Mat& m) {
  Mat t = m.transpose();
  m = 0.5 * (m + t);
}

// v^T M v. O(D^2).
inline double quadratic_form(const Mat& m, const Vec& v) {
  if (m.rows() != m.cols() || m.rows() != v.size())
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  return v.dot(m * v);
}

// (A + c uu^T)^-1 given A^-1, via the Sherman-Morrison identity:
//   (A + c uu^T)^-1 = A^-1 - (c/g) (A^-1 u)(A^-1 u)^T,  g = 1 + c u^T A^-1 u.
// The signed scalar weight c keeps downdates (c < 0) free of complex square
// roots. Output is re-symmetrized to stop asymmetry drift over long streams.
inline Mat sm_rank_one(const Mat& ainv, const Vec& u, double c) {
  if (ainv.rows() != ainv.cols() || ainv.rows() != u.size())
    throw std::invalid_argument("sm_rank_one: dimension mismatch");
  const Vec w = ainv * u;
  const double g = 1.0 + c * u.dot(w);
  if (!(std::abs(g) > kSingularEpsilon)) throw SingularUpdate(g);
  Mat out = ainv - (c / g) * (w * w.transpose());
  symmetrize(out);
  return out;
}

// det(A + c uu^T) given det(A) and A^-1 (matrix determinant lemma).
inline double det_rank_one(double det_a, const Mat& ainv, const Vec& u,
                           double c) {
  if (ainv.rows() != ainv.cols() || ainv.rows() != u.size())
    throw std::invalid_argument("det_rank_one: dimension mismatch");
  if (det_a == 0.0)
    throw std::invalid_argument("det_rank_one: det_a must be nonzero");
  return det_a * (1.0 + c * quadratic_form(ainv, u));
}

// ln sum_i exp(v_i), max-shifted. Returns -inf when every entry is -inf.
inline double log_sum_exp(const Vec& v) {
  if (v.size() == 0)
    throw std::invalid_argument("log_sum_exp: empty input");
  const double m = v.maxCoeff();
  if (m == -std::numeric_limits<double>::infinity()) return m;
  if (!std::isfinite(m)) return m;  // +inf or nan propagates
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

namespace detail {

// Regularized lower incomplete gamma P(a, x): series expansion below the
// a+1 crossover, Lentz continued fraction for the upper tail above it.
inline double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0)
    throw std::invalid_argument("gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    const double p = sum * std::exp(log_prefactor);
    return p < 1.0 ? p : 1.0;
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  const double q = std::exp(log_prefactor) * h;
  return q < 1.0 ? 1.0 - q : 0.0;
}

// ln pdf of a chi-squared distribution with `dof` degrees of freedom.
inline double chi2_log_pdf(int dof, double x) {
  const double a = 0.5 * dof;
  return (a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) -
         std::lgamma(a);
}

}  // namespace detail

// Quantile q with P(dof/2, q/2) = p: safeguarded Newton iteration on the
// regularized lower incomplete gamma, falling back to bisection whenever a
// step leaves the current bracket. Probabilities above kMaxProbability are
// clamped; p = 0 maps to 0.
inline double chi2_quantile(int dof, double p) {
  if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("chi2_quantile: p must lie in [0, 1)");
  if (p > kMaxProbability) p = kMaxProbability;
  if (p == 0.0) return 0.0;

  const double a = 0.5 * dof;
  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 20.0;
  while (detail::gamma_p(a, 0.5 * hi) < p && hi < 1e12) {
    lo = hi;
    hi *= 2.0;
  }

  // d/dq P(a, q/2) is exactly the chi-squared pdf at q.
  double x = 0.5 * (lo + hi);
  double step_old = hi - lo;
  double step = step_old;
  double f = detail::gamma_p(a, 0.5 * x) - p;
  for (int iter = 0; iter < 200; ++iter) {
    if (f >= 0.0)
      hi = x;
    else
      lo = x;
    if (std::abs(f) <= 1e-13 * p || hi - lo <= 1e-15 * hi) break;
    const double dfdx = std::exp(detail::chi2_log_pdf(dof, x));
    const bool newton_ok =
        dfdx > 0.0 && std::abs(2.0 * f) <= std::abs(step_old * dfdx);
    step_old = step;
    if (newton_ok) {
      step = f / dfdx;
      const double next = x - step;
      if (next > lo && next < hi) {
        x = next;
      } else {
        step = 0.5 * (hi - lo);
        x = lo + step;
      }
    } else {
      step = 0.5 * (hi - lo);
      x = lo + step;
    }
    f = detail::gamma_p(a, 0.5 * x) - p;
  }
  return x;
}

}  // namespace figmn
