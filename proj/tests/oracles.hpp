#pragma once

// Test-only oracles, independent of the implementation paths they check:
// dense inversion/determinants via Eigen's pivoted LU, a naive quadratic
// form, and a chi-squared CDF obtained by numerical quadrature.

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "figmn/numerics.hpp"

namespace oracles {

using figmn::Mat;
using figmn::Vec;

inline Vec random_vec(int dim, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v;
}

// Random SPD matrix Q diag(ev) Q^T with eigenvalues uniform in [lo, hi].
inline Mat random_spd(int dim, std::mt19937_64& rng, double lo = 0.5,
                      double hi = 2.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> ev_dist(lo, hi);
  Mat g(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = normal(rng);
  const Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  Vec ev(dim);
  for (int i = 0; i < dim; ++i) ev[i] = ev_dist(rng);
  Mat out = q * ev.asDiagonal() * q.transpose();
  figmn::symmetrize(out);
  return out;
}

inline double naive_quadratic_form(const Mat& m, const Vec& v) {
  double acc = 0.0;
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) acc += v[a] * m(a, b) * v[b];
  return acc;
}

inline Mat dense_inverse(const Mat& m) {
  return Eigen::FullPivLU<Mat>(m).inverse();
}

inline double dense_det(const Mat& m) {
  return Eigen::FullPivLU<Mat>(m).determinant();
}

inline double min_eigenvalue(const Mat& m) {
  return Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues().minCoeff();
}

// Chi-squared CDF by composite Simpson quadrature after the substitution
// x = u^2, which removes the dof = 1 endpoint singularity:
//   P(q) = int_0^sqrt(q) 2 u^(dof-1) exp(-u^2/2) du / (2^(dof/2) Gamma(dof/2))
inline double chi2_cdf_quadrature(int dof, double q, int panels = 20000) {
  if (q <= 0.0) return 0.0;
  const double a = 0.5 * dof;
  const double log_norm = a * std::log(2.0) + std::lgamma(a);
  const double upper = std::sqrt(q);
  const auto integrand = [&](double u) {
    if (u == 0.0) return dof == 1 ? 2.0 * std::exp(-log_norm) : 0.0;
    return 2.0 * std::exp((dof - 1) * std::log(u) - 0.5 * u * u - log_norm);
  };
  const double h = upper / (2 * panels);
  double acc = integrand(0.0) + integrand(upper);
  for (int i = 1; i < 2 * panels; ++i)
    acc += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Quantile by bisection on the quadrature CDF.
inline double chi2_quantile_bisection(int dof, double p) {
  double lo = 0.0;
  double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 20.0;
  while (chi2_cdf_quadrature(dof, hi) < p) hi *= 2.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf_quadrature(dof, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline long double log_sum_exp_long(const Vec& v) {
  long double m = v[0];
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v[i] > m) m = v[i];
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    s += std::exp(static_cast<long double>(v[i]) - m);
  return m + std::log(s);
}

}  // namespace oracles
