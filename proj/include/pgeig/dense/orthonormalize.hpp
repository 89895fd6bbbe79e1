// Modified Gram-Schmidt with one reorthogonalization pass.
#pragma once


#include <Eigen/Dense>

#include "pgeig/errors.hpp"

namespace pgeig::dense {

/// Relative norm drop below which a direction counts as linearly dependent.
inline constexpr double kDependenceThreshold = 1e-10;

/// Number of columns that survive orthonormalization (numerical rank).
inline std::size_t numerical_rank(const Eigen::MatrixXd& columns,
                                  double threshold = kDependenceThreshold) {
  Eigen::MatrixXd q(columns.rows(), columns.cols());
  std::size_t rank = 0;
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::VectorXd w = columns.col(j);
    const double pre = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t k = 0; k < rank; ++k) {
        const auto qk = q.col(static_cast<Eigen::Index>(k));
        w -= qk.dot(w) * qk;
      }
    const double post = w.norm();
    if (pre == 0.0 || post < threshold * pre) continue;
    q.col(static_cast<Eigen::Index>(rank++)) = w / post;
  }
  return rank;
}

/// Orthonormal basis of the column space. Throws DegenerateSubspaceError
/// carrying the detected rank when any column is dependent on its predecessors.
inline Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns,
                                      double threshold = kDependenceThreshold) {
  Eigen::MatrixXd q(columns.rows(), columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::VectorXd w = columns.col(j);
    const double pre = w.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < j; ++k) w -= q.col(k).dot(w) * q.col(k);
    const double post = w.norm();
    if (pre == 0.0 || post < threshold * pre)
      throw DegenerateSubspaceError(numerical_rank(columns, threshold),
                                    static_cast<std::size_t>(columns.cols()));
    q.col(j) = w / post;
  }
  return q;
}

}  // namespace pgeig::dense
