// Cyclic Jacobi eigensolver for small dense symmetric matrices.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "pgeig/errors.hpp"

namespace pgeig::dense {

enum class Order { ascending, descending };

struct SymmetricEigen {
  Eigen::VectorXd values;   // sorted per the requested Order
  Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) belongs to values(i)
};

namespace detail {

inline double off_diagonal_norm(const Eigen::MatrixXd& m) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j) sum += m(i, j) * m(i, j);
  return std::sqrt(sum);
}

// Applies the rotation annihilating m(p, q) to both sides of m and accumulates it in v.
inline void rotate(Eigen::MatrixXd& m, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = m(p, q);
  if (apq == 0.0) return;
  const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Eigen::Index n = m.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mkp = m(k, p);
    const double mkq = m(k, q);
    m(k, p) = c * mkp - s * mkq;
    m(k, q) = s * mkp + c * mkq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mpk = m(p, k);
    const double mqk = m(q, k);
    m(p, k) = c * mpk - s * mqk;
    m(q, k) = s * mpk + c * mqk;
  }
  // The update above leaves rounding residue in the annihilated pair.
  m(p, q) = 0.0;
  m(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace detail

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `relative_threshold * ||M||_F`. Only the lower triangle of `matrix` is read.
inline SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& matrix, Order order = Order::ascending,
                                   double relative_threshold = 1e-14, int max_sweeps = 100) {
  if (matrix.rows() != matrix.cols()) throw DomainError("jacobi_eigen: matrix is not square");
  const Eigen::Index n = matrix.rows();
  Eigen::MatrixXd m = matrix.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  if (!m.allFinite()) throw NumericFailure("jacobi_eigen: non-finite matrix entry");

  const double scale = m.norm();
  int sweep = 0;
  while (detail::off_diagonal_norm(m) > relative_threshold * scale) {
    if (++sweep > max_sweeps) throw NumericFailure("jacobi_eigen: no convergence");
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) detail::rotate(m, v, p, q);
  }

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
    return order == Order::ascending ? m(a, a) < m(b, b) : m(a, a) > m(b, b);
  });

  SymmetricEigen out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(perm[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace pgeig::dense
