// Independent reference computations used by the tests. Nothing here calls
// into the library's eigensolvers.
#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace oracle {

inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& rng, double shift = 0.5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
  Eigen::MatrixXd m = g * g.transpose() + shift * static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

/// Ascending generalized eigenvalues of A x = lambda B x (LAPACK-style reduction inside Eigen).
inline Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, b, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Spectral norm of a symmetric matrix by power iteration.
inline double power_norm(const Eigen::MatrixXd& m, int steps = 200, double tol = 1e-10) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += 0.01 * static_cast<double>(i);
  v.normalize();
  double estimate = 0.0;
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd w = m * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - estimate) <= tol * next) return next;
    estimate = next;
  }
  return estimate;
}

/// Larger root of the 2x2 symmetric eigenproblem [[p, q], [q, s]].
inline double larger_root(double p, double q, double s) {
  const double mean = 0.5 * (p + s);
  return mean + std::sqrt(0.25 * (p - s) * (p - s) + q * q);
}

/// Largest mu-form Ritz value of span{x, d} for B = diag(mus), A = I, by
/// solving the 2x2 generalized problem in the raw basis [x, d].
inline double ritz_max_raw(const Eigen::VectorXd& mus, const Eigen::VectorXd& x, const Eigen::VectorXd& d) {
  Eigen::Matrix2d g, h;
  g << x.dot(x), x.dot(d), d.dot(x), d.dot(d);
  h << x.dot(mus.cwiseProduct(x)), x.dot(mus.cwiseProduct(d)), d.dot(mus.cwiseProduct(x)),
      d.dot(mus.cwiseProduct(d));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> solver(h, g, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(1);
}

}  // namespace oracle
