// Symmetric positive definite pencils (A, B), Rayleigh quotients, the
// congruence to diagonal form, and Rayleigh-Ritz projection.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pgeig/dense/jacobi.hpp"
#include "pgeig/dense/orthonormalize.hpp"
#include "pgeig/errors.hpp"

namespace pgeig {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Generalized eigenvalues lambda_1 <= ... <= lambda_n and mu_i = 1 / lambda_i.
///
/// Both lists share the index: mus()(i) is the reciprocal of lambdas()(i), so
/// mus() is nonincreasing.
class Spectrum {
 public:
  Spectrum() = default;

  static Spectrum from_lambdas(Vector lambdas) {
    if (lambdas.size() == 0) throw DomainError("spectrum: empty eigenvalue list");
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
      if (!(lambdas(i) > 0.0) || !std::isfinite(lambdas(i)))
        throw DomainError("spectrum: eigenvalues must be positive and finite");
      if (i > 0 && lambdas(i) < lambdas(i - 1))
        throw DomainError("spectrum: eigenvalues must be nondecreasing");
    }
    Spectrum s;
    s.mus_ = lambdas.cwiseInverse();
    s.lambdas_ = std::move(lambdas);
    return s;
  }

  static Spectrum from_lambdas(std::span<const double> lambdas) {
    return from_lambdas(Vector(Eigen::Map<const Vector>(lambdas.data(),
                                                        static_cast<Eigen::Index>(lambdas.size()))));
  }

  /// `mus` must be nonincreasing and positive.
  static Spectrum from_mus(const Vector& mus) {
    Spectrum s = from_lambdas(Vector(mus.cwiseInverse()));
    s.mus_ = mus;  // keep the caller's exact values
    return s;
  }

  Eigen::Index size() const noexcept { return lambdas_.size(); }
  const Vector& lambdas() const noexcept { return lambdas_; }
  const Vector& mus() const noexcept { return mus_; }
  double lambda(Eigen::Index i) const { return lambdas_(i); }
  double mu(Eigen::Index i) const { return mus_(i); }

 private:
  Vector lambdas_;
  Vector mus_;
};

/// Pair (A, B) of symmetric positive definite matrices of equal size.
///
/// Symmetry is checked exactly on the stored entries, definiteness by a
/// Cholesky attempt. An optional reference spectrum can be attached for
/// certification runs.
class SymmetricPencil {
 public:
  SymmetricPencil(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != a_.cols() || b_.rows() != b_.cols())
      throw ConstructionError("pencil: matrices must be square");
    if (a_.rows() != b_.rows()) throw ConstructionError("pencil: A and B differ in size");
    if (a_.rows() == 0) throw ConstructionError("pencil: empty matrices");
    if (!a_.allFinite() || !b_.allFinite())
      throw ConstructionError("pencil: non-finite matrix entry");
    if (a_ != a_.transpose()) throw ConstructionError("pencil: A is not symmetric");
    if (b_ != b_.transpose()) throw ConstructionError("pencil: B is not symmetric");
    if (Eigen::LLT<Matrix>(a_).info() != Eigen::Success)
      throw ConstructionError("pencil: A is not positive definite (Cholesky breakdown)");
    if (Eigen::LLT<Matrix>(b_).info() != Eigen::Success)
      throw ConstructionError("pencil: B is not positive definite (Cholesky breakdown)");
  }

  const Matrix& a() const noexcept { return a_; }
  const Matrix& b() const noexcept { return b_; }
  Eigen::Index size() const noexcept { return a_.rows(); }

  const std::optional<Spectrum>& known_spectrum() const noexcept { return spectrum_; }

  SymmetricPencil with_spectrum(Spectrum spectrum) const {
    if (spectrum.size() != size()) throw DomainError("pencil: spectrum size mismatch");
    SymmetricPencil copy = *this;
    copy.spectrum_ = std::move(spectrum);
    return copy;
  }

 private:
  Matrix a_;
  Matrix b_;
  std::optional<Spectrum> spectrum_;
};

/// Rayleigh quotient in both forms: rho = (x,Ax)/(x,Bx) and mu = 1/rho.
struct RayleighValue {
  double rho = 0.0;
  double mu = 0.0;

  static RayleighValue from_rho(double rho) { return {rho, 1.0 / rho}; }
  static RayleighValue from_mu(double mu) { return {1.0 / mu, mu}; }
};

inline RayleighValue rayleigh(const SymmetricPencil& pencil, const Vector& x) {
  if (x.size() != pencil.size()) throw DomainError("rayleigh: dimension mismatch");
  const double xbx = x.dot(pencil.b() * x);
  const double xax = x.dot(pencil.a() * x);
  if (x.squaredNorm() == 0.0 || xbx == 0.0) throw DomainError("rayleigh: zero vector");
  return {xax / xbx, xbx / xax};
}

enum class ResidualForm {
  lambda,  // Ax - rho(x) Bx
  mu,      // Bx - mu(x) Ax, i.e. Bx - mu(x) x once A = I
};

inline Vector residual(const SymmetricPencil& pencil, const Vector& x, const RayleighValue& value,
                       ResidualForm form = ResidualForm::lambda) {
  if (x.size() != pencil.size()) throw DomainError("residual: dimension mismatch");
  if (x.squaredNorm() == 0.0) throw DomainError("residual: zero vector");
  if (form == ResidualForm::lambda) return pencil.a() * x - value.rho * (pencil.b() * x);
  return pencil.b() * x - value.mu * (pencil.a() * x);
}

inline Vector residual(const SymmetricPencil& pencil, const Vector& x,
                       ResidualForm form = ResidualForm::lambda) {
  return residual(pencil, x, rayleigh(pencil, x), form);
}

/// Congruence y = basis * x under which A becomes I and B becomes diag(mus).
///
/// With A = C C^T (Cholesky) and C^{-1} B C^{-T} = Q diag(mu) Q^T the basis is
/// Q^T C^T and the inverse basis C^{-T} Q. The mus are in decreasing order.
struct DiagonalForm {
  Vector mus;
  Matrix basis;
  Matrix inverse_basis;

  Eigen::Index size() const noexcept { return mus.size(); }

  Vector to_diagonal(const Vector& x) const { return basis * x; }
  Vector from_diagonal(const Vector& y) const { return inverse_basis * y; }

  Spectrum spectrum() const { return Spectrum::from_mus(mus); }

  /// The pencil (I, diag(mus)) with its spectrum attached.
  SymmetricPencil pencil() const {
    const Eigen::Index n = size();
    return SymmetricPencil(Matrix::Identity(n, n), Matrix(mus.asDiagonal())).with_spectrum(spectrum());
  }

  /// T acting on original residuals, expressed in diagonal coordinates: S T S^T.
  Matrix to_diagonal_operator(const Matrix& t) const { return basis * t * basis.transpose(); }

  /// Inverse of to_diagonal_operator.
  Matrix from_diagonal_operator(const Matrix& t) const {
    return inverse_basis * t * inverse_basis.transpose();
  }
};

inline DiagonalForm diagonalize(const SymmetricPencil& pencil) {
  const Eigen::LLT<Matrix> llt(pencil.a());
  if (llt.info() != Eigen::Success)
    throw ConstructionError("diagonalize: A is not positive definite");
  const Matrix c = llt.matrixL();
  // m = C^{-1} B C^{-T}
  Matrix m = c.triangularView<Eigen::Lower>().solve(pencil.b());
  m = c.triangularView<Eigen::Lower>().solve(Matrix(m.transpose()));
  m = 0.5 * (m + m.transpose()).eval();

  const dense::SymmetricEigen eig = dense::jacobi_eigen(m, dense::Order::descending);
  if (eig.values.minCoeff() <= 0.0)
    throw ConstructionError("diagonalize: B is not positive definite");

  DiagonalForm form;
  form.mus = eig.values;
  form.basis = eig.vectors.transpose() * c.transpose();
  form.inverse_basis = c.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);
  return form;
}

/// Pencil spectrum from a dense diagonalization (at desk scale).
inline Spectrum compute_spectrum(const SymmetricPencil& pencil) {
  if (pencil.known_spectrum()) return *pencil.known_spectrum();
  return diagonalize(pencil).spectrum();
}

struct RitzPair {
  RayleighValue value;
  Vector vector;  // normalized so that (w, Aw) = 1
};

/// Rayleigh-Ritz on the column space of `basis_vectors`.
///
/// The columns are orthonormalized first; the projected pencil is reduced to
/// a standard symmetric problem and solved by Jacobi rotations. Pairs come
/// back with decreasing mu (increasing rho).
inline std::vector<RitzPair> rayleigh_ritz(const SymmetricPencil& pencil, const Matrix& basis_vectors) {
  if (basis_vectors.rows() != pencil.size()) throw DomainError("rayleigh_ritz: dimension mismatch");
  if (basis_vectors.cols() == 0) throw DomainError("rayleigh_ritz: empty basis");
  const Matrix v = dense::orthonormalize(basis_vectors);
  Matrix pa = v.transpose() * pencil.a() * v;
  Matrix pb = v.transpose() * pencil.b() * v;
  pa = 0.5 * (pa + pa.transpose()).eval();
  pb = 0.5 * (pb + pb.transpose()).eval();

  const Eigen::LLT<Matrix> llt(pa);
  if (llt.info() != Eigen::Success)
    throw DegenerateSubspaceError(0, static_cast<std::size_t>(basis_vectors.cols()));
  const Matrix l = llt.matrixL();
  Matrix m = l.triangularView<Eigen::Lower>().solve(pb);
  m = l.triangularView<Eigen::Lower>().solve(Matrix(m.transpose()));
  m = 0.5 * (m + m.transpose()).eval();

  const dense::SymmetricEigen eig = dense::jacobi_eigen(m, dense::Order::descending);
  const Matrix coeffs = l.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);

  std::vector<RitzPair> pairs;
  pairs.reserve(static_cast<std::size_t>(eig.values.size()));
  for (Eigen::Index k = 0; k < eig.values.size(); ++k)
    pairs.push_back({RayleighValue::from_mu(eig.values(k)), v * coeffs.col(k)});
  return pairs;
}

inline std::vector<RitzPair> rayleigh_ritz(const SymmetricPencil& pencil,
                                           std::span<const Vector> basis_vectors) {
  Matrix columns(pencil.size(), static_cast<Eigen::Index>(basis_vectors.size()));
  for (std::size_t k = 0; k < basis_vectors.size(); ++k)
    columns.col(static_cast<Eigen::Index>(k)) = basis_vectors[k];
  return rayleigh_ritz(pencil, columns);
}

}  // namespace pgeig
