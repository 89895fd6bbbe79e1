// Preconditioners, their spectral-equivalence quality, and the optimal rescaling.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include <Eigen/Dense>

#include "pgeig/dense/jacobi.hpp"
#include "pgeig/dense/orthonormalize.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"

namespace pgeig {

/// Spectral-equivalence data of a preconditioner T for the matrix A.
///
/// gamma1 (z,T^{-1}z) <= (z,Az) <= gamma2 (z,T^{-1}z). When both constants are
/// present, gamma equals (gamma2 - gamma1) / (gamma1 + gamma2), the quality
/// reached after the optimal rescaling.
struct PrecondQuality {
  std::optional<double> gamma;
  std::optional<double> gamma1;
  std::optional<double> gamma2;

  static PrecondQuality from_constants(double gamma1, double gamma2) {
    if (!(gamma1 > 0.0) || !(gamma2 >= gamma1))
      throw DomainError("quality: need 0 < gamma1 <= gamma2");
    return {(gamma2 - gamma1) / (gamma1 + gamma2), gamma1, gamma2};
  }

  bool has_constants() const noexcept { return gamma1.has_value() && gamma2.has_value(); }

  /// Smallest gamma with (1-gamma) T^{-1} <= A <= (1+gamma) T^{-1} for T as is,
  /// i.e. the spectral radius of I - TA. May be >= 1 for a badly scaled T.
  std::optional<double> admissible_gamma() const {
    if (has_constants()) return std::max(1.0 - *gamma1, *gamma2 - 1.0);
    return gamma;
  }
};

/// Symmetric positive definite operator r -> T r, stored densely.
class Preconditioner {
 public:
  Preconditioner(Matrix t, PrecondQuality quality = {}) : t_(std::move(t)), quality_(quality) {
    if (t_.rows() != t_.cols()) throw ConstructionError("preconditioner: matrix is not square");
    if (!t_.allFinite()) throw ConstructionError("preconditioner: non-finite entry");
    const double asym = (t_ - t_.transpose()).norm();
    if (asym > 1e-10 * t_.norm()) throw ConstructionError("preconditioner: T is not symmetric");
    t_ = 0.5 * (t_ + t_.transpose()).eval();
    if (Eigen::LLT<Matrix>(t_).info() != Eigen::Success)
      throw ConstructionError("preconditioner: T is not positive definite");
  }

  Vector apply(const Vector& r) const { return t_ * r; }
  const Matrix& matrix() const noexcept { return t_; }
  const PrecondQuality& quality() const noexcept { return quality_; }
  Eigen::Index size() const noexcept { return t_.rows(); }

  /// c * T. Spectral-equivalence constants scale with c; the rescaled gamma does not change.
  Preconditioner scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("preconditioner: scale factor must be positive");
    PrecondQuality q = quality_;
    if (q.has_constants()) {
      q.gamma1 = *q.gamma1 * c;
      q.gamma2 = *q.gamma2 * c;
    } else {
      q.gamma.reset();
    }
    return Preconditioner(c * t_, q);
  }

 private:
  Matrix t_;
  PrecondQuality quality_;
};

/// gamma1, gamma2 as the extreme eigenvalues of TA, computed densely via C^T T C with A = C C^T.
inline PrecondQuality estimate_quality(const SymmetricPencil& pencil, const Preconditioner& t) {
  if (t.size() != pencil.size()) throw DomainError("estimate_quality: dimension mismatch");
  const Eigen::LLT<Matrix> llt(pencil.a());
  const Matrix c = llt.matrixL();
  Matrix m = c.transpose() * t.matrix() * c;
  m = 0.5 * (m + m.transpose()).eval();
  const dense::SymmetricEigen eig = dense::jacobi_eigen(m);
  return PrecondQuality::from_constants(eig.values(0), eig.values(eig.values.size() - 1));
}

/// (2 / (gamma1 + gamma2)) T, which satisfies the gamma-bound with the rescaled gamma.
inline Preconditioner rescale(const Preconditioner& t, const PrecondQuality& quality) {
  if (!quality.has_constants())
    throw PreconditionError("rescale: spectral-equivalence constants gamma1, gamma2 are required");
  const double c = 2.0 / (*quality.gamma1 + *quality.gamma2);
  return Preconditioner(c * t.matrix(), PrecondQuality::from_constants(c * *quality.gamma1,
                                                                       c * *quality.gamma2));
}

inline Preconditioner rescale(const Preconditioner& t) { return rescale(t, t.quality()); }

/// T = A^{-1}, assembled from the diagonal form as inverse_basis * inverse_basis^T.
inline Preconditioner exact_inverse_preconditioner(const DiagonalForm& form) {
  Matrix t = form.inverse_basis * form.inverse_basis.transpose();
  return Preconditioner(std::move(t), PrecondQuality::from_constants(1.0, 1.0));
}

/// T = diag(A)^{-1} with estimated quality.
inline Preconditioner jacobi_preconditioner(const SymmetricPencil& pencil) {
  const Vector d = pencil.a().diagonal();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d(i) > 0.0)) throw ConstructionError("jacobi preconditioner: nonpositive diagonal entry");
  Preconditioner t(Matrix(d.cwiseInverse().asDiagonal()));
  return Preconditioner(t.matrix(), estimate_quality(pencil, t));
}

enum class SyntheticMode {
  random,         // E = Q diag(eta) Q^T, Q random orthogonal, |eta_i| <= gamma with equality attained
  worst_aligned,  // E = gamma H, H the reflection steering T r onto a prescribed direction
  identity,       // E = 0
};

/// Target for SyntheticMode::worst_aligned, in diagonal coordinates.
struct AlignmentTarget {
  Vector residual;   // r = Bx - mu(x) x
  Vector direction;  // desired direction of T r (e.g. d - mu(x) x for a cone-boundary d)
};

namespace detail {

inline Matrix random_orthogonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (;;) {
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) g(i, j) = normal(rng);
    try {
      return dense::orthonormalize(g);
    } catch (const DegenerateSubspaceError&) {
      // probability zero; draw again
    }
  }
}

// Symmetric E with ||E|| = gamma and E r = r - w, where w = s * direction lies on
// the sphere of radius gamma ||r|| around r.
inline Matrix aligned_error(const AlignmentTarget& target, double gamma) {
  const Vector& r = target.residual;
  const Vector& d = target.direction;
  if (r.size() != d.size()) throw DomainError("worst_aligned: dimension mismatch");
  const double rr = r.squaredNorm();
  const double dd = d.squaredNorm();
  if (rr == 0.0 || dd == 0.0) throw DomainError("worst_aligned: zero residual or direction");
  const double rd = r.dot(d);
  // s^2 |d|^2 - 2 s (r,d) + (1 - gamma^2) |r|^2 = 0
  double disc = rd * rd - dd * rr * (1.0 - gamma * gamma);
  if (disc < 0.0) {
    if (disc < -1e-10 * rd * rd) throw DomainError("worst_aligned: direction lies outside the cone");
    disc = 0.0;
  }
  const double s = (rd + std::sqrt(disc)) / dd;
  const Vector e = r - s * d;
  const Eigen::Index n = r.size();
  if (gamma == 0.0) return Matrix::Zero(n, n);
  const Vector u = r / std::sqrt(rr);
  const Vector g = e / e.norm();
  const Vector v = u - g;
  Matrix h = Matrix::Identity(n, n);
  if (v.norm() > 1e-15) h -= 2.0 * v * v.transpose() / v.squaredNorm();
  return gamma * h;
}

}  // namespace detail

/// Preconditioner with ||I - T|| <= gamma in the diagonal coordinates of `form`,
/// mapped back to the original coordinates of the pencil.
///
/// The returned quality reports gamma exactly with gamma1 = 1 - gamma and
/// gamma2 = 1 + gamma.
inline Preconditioner synthetic_gamma_preconditioner(const DiagonalForm& form, double gamma,
                                                     std::uint64_t seed,
                                                     SyntheticMode mode = SyntheticMode::random,
                                                     const std::optional<AlignmentTarget>& target = {}) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("synthetic preconditioner: gamma must lie in [0,1)");
  const Eigen::Index n = form.size();
  Matrix e = Matrix::Zero(n, n);
  switch (mode) {
    case SyntheticMode::identity:
      break;
    case SyntheticMode::random: {
      std::mt19937_64 rng(seed);
      const Matrix q = detail::random_orthogonal(n, rng);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      Vector eta(n);
      for (Eigen::Index i = 0; i < n; ++i) eta(i) = unit(rng);
      Eigen::Index imax = 0;
      eta.cwiseAbs().maxCoeff(&imax);
      eta(imax) = eta(imax) < 0.0 ? -1.0 : 1.0;
      e = q * (gamma * eta).asDiagonal() * q.transpose();
      break;
    }
    case SyntheticMode::worst_aligned:
      if (!target) throw PreconditionError("worst_aligned mode needs an alignment target");
      if (target->residual.size() != n) throw DomainError("worst_aligned: dimension mismatch");
      e = detail::aligned_error(*target, gamma);
      break;
  }
  Matrix t_diag = Matrix::Identity(n, n) - e;
  t_diag = 0.5 * (t_diag + t_diag.transpose()).eval();
  Matrix t = form.from_diagonal_operator(t_diag);
  t = 0.5 * (t + t.transpose()).eval();
  PrecondQuality quality = PrecondQuality::from_constants(1.0 - gamma, 1.0 + gamma);
  quality.gamma = gamma;
  return Preconditioner(std::move(t), quality);
}

}  // namespace pgeig
