// Single steps of the four solvers and the stepping driver.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pgeig/bounds.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"
#include "pgeig/precond.hpp"
#include "pgeig/solver_kind.hpp"

namespace pgeig {

/// Relative residual below which x counts as an eigenvector.
inline constexpr double kConvergedResidual = 1e-13;
/// Relative size below which a search direction is treated as absent.
inline constexpr double kDegenerateDirection = 1e-14;

enum class StepStatus {
  advanced,
  converged,   // x is an eigenvector; returned unchanged
  stationary,  // search subspace collapsed to span{x}; returned unchanged
};

struct StepResult {
  Vector x;  // normalized to (x, Ax) = 1
  RayleighValue rho;
  /// Step length: x_next is proportional to x - theta_opt * T r. 1 for the fixed-step
  /// kinds, +-infinity when the Ritz vector has no x component, NaN when no step was taken.
  double theta_opt = std::numeric_limits<double>::quiet_NaN();
  StepStatus status = StepStatus::advanced;
};

namespace detail {

inline Vector a_normalized(const SymmetricPencil& pencil, const Vector& x) {
  const double xax = x.dot(pencil.a() * x);
  if (!(xax > 0.0) || !std::isfinite(xax)) throw NumericFailure("iterate: cannot normalize iterate");
  return x / std::sqrt(xax);
}

inline StepResult unchanged(const SymmetricPencil& pencil, const Vector& x, const RayleighValue& rho,
                            StepStatus status) {
  return {a_normalized(pencil, x), rho, std::numeric_limits<double>::quiet_NaN(), status};
}

inline bool is_eigenvector(const SymmetricPencil& pencil, const Vector& x, const Vector& r) {
  return r.norm() < kConvergedResidual * (pencil.a() * x).norm();
}

}  // namespace detail

/// Fixed-step preconditioned gradient step x' = x - T(Ax - rho(x) Bx).
inline StepResult pinvit1_step(const SymmetricPencil& pencil, const Preconditioner& t, const Vector& x) {
  if (t.size() != pencil.size()) throw DomainError("pinvit1_step: dimension mismatch");
  const RayleighValue rho = rayleigh(pencil, x);
  const Vector r = residual(pencil, x, rho);
  if (detail::is_eigenvector(pencil, x, r)) return detail::unchanged(pencil, x, rho, StepStatus::converged);
  const Vector next = x - t.apply(r);
  if (next.squaredNorm() == 0.0) throw NumericFailure("pinvit1_step: update annihilated the iterate");
  const Vector xn = detail::a_normalized(pencil, next);
  return {xn, rayleigh(pencil, xn), 1.0, StepStatus::advanced};
}

/// Preconditioned steepest descent: the Ritz vector of the smaller Ritz value
/// (in rho) on span{x, T(Ax - rho(x) Bx)}.
///
/// The Ritz vector is signed so that its first nonzero coordinate in the
/// basis [x, d] is positive.
inline StepResult psd_step(const SymmetricPencil& pencil, const Preconditioner& t, const Vector& x) {
  if (t.size() != pencil.size()) throw DomainError("psd_step: dimension mismatch");
  const RayleighValue rho = rayleigh(pencil, x);
  const Vector r = residual(pencil, x, rho);
  if (detail::is_eigenvector(pencil, x, r)) return detail::unchanged(pencil, x, rho, StepStatus::converged);
  const Vector d = t.apply(r);
  if (d.norm() < kDegenerateDirection * x.norm())
    return detail::unchanged(pencil, x, rho, StepStatus::stationary);

  Matrix basis(x.size(), 2);
  basis.col(0) = x;
  basis.col(1) = d;
  std::vector<RitzPair> pairs;
  try {
    pairs = rayleigh_ritz(pencil, basis);
  } catch (const DegenerateSubspaceError&) {
    return detail::unchanged(pencil, x, rho, StepStatus::stationary);
  }
  Vector w = pairs.front().vector;

  // Coordinates of w with respect to the unit columns x/|x|, d/|d|.
  Matrix unit(x.size(), 2);
  unit.col(0) = x / x.norm();
  unit.col(1) = d / d.norm();
  Eigen::Vector2d c = unit.householderQr().solve(w);
  c.normalize();
  const bool x_absent = std::abs(c(0)) < kDegenerateDirection;
  if ((x_absent ? c(1) : c(0)) < 0.0) {
    w = -w;
    c = -c;
  }
  double theta = 0.0;
  if (x_absent) {
    theta = c(1) > 0.0 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  } else {
    // w ~ c0 x/|x| + c1 d/|d| ~ x - theta d
    theta = -(c(1) / d.norm()) / (c(0) / x.norm());
  }
  const Vector xn = detail::a_normalized(pencil, w);
  return {xn, rayleigh(pencil, xn), theta, StepStatus::advanced};
}

/// Inverse iteration step, pinvit1_step with T = A^{-1}.
inline StepResult invit1_step(const SymmetricPencil& pencil, const DiagonalForm& form, const Vector& x) {
  return pinvit1_step(pencil, exact_inverse_preconditioner(form), x);
}

inline StepResult invit1_step(const SymmetricPencil& pencil, const Vector& x) {
  return invit1_step(pencil, diagonalize(pencil), x);
}

/// Steepest descent step, psd_step with T = A^{-1}.
inline StepResult invit2_step(const SymmetricPencil& pencil, const DiagonalForm& form, const Vector& x) {
  return psd_step(pencil, exact_inverse_preconditioner(form), x);
}

inline StepResult step(SolverKind kind, const SymmetricPencil& pencil, const Preconditioner& t,
                       const Vector& x) {
  return uses_ritz_step(kind) ? psd_step(pencil, t, x) : pinvit1_step(pencil, t, x);
}

// ---------------------------------------------------------------------------
// Driver

struct StopCriteria {
  int max_steps = 500;
  double residual_tol = 1e-10;  // relative to |Ax|
  double delta_tol = 0.0;       // 0 disables the Delta test
};

enum class RunStatus { converged, stationary, max_steps };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::stationary: return "stationary";
    case RunStatus::max_steps: return "max_steps";
  }
  return "?";
}

struct IterationRecord {
  int step_index = 0;
  Vector x;  // original coordinates, (x, Ax) = 1
  RayleighValue rho;
  double residual_norm = 0.0;  // |Ax - rho Bx|
  double relative_residual = 0.0;  // residual_norm / |Ax|
  Eigen::Index interval_index = 0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  std::optional<BoundCheck> bound;  // certification of the step that produced this record
};

struct RunResult {
  std::vector<IterationRecord> records;  // records[0] is the start vector
  RunStatus status = RunStatus::max_steps;
  bool monotone = true;
  Spectrum spectrum;
};

struct RunOptions {
  StopCriteria stop;
  /// Certify every step against this gamma (ignored for the exact-inverse kinds, which use 0).
  std::optional<double> certify_gamma;
};

/// Iterates `kind` from x0 until the residual or Delta test passes or max_steps is hit.
///
/// The pencil is diagonalized once and all steps run in those coordinates
/// (A = I, B = diag(mu)); records are mapped back. `t` is ignored for the
/// exact-inverse kinds.
inline RunResult run(const SymmetricPencil& pencil, const Preconditioner& t, const Vector& x0,
                     SolverKind kind, const RunOptions& options = {}) {
  if (x0.size() != pencil.size()) throw DomainError("run: dimension mismatch");
  if (x0.squaredNorm() == 0.0) throw DomainError("run: zero start vector");
  if (!uses_exact_inverse(kind) && t.size() != pencil.size())
    throw DomainError("run: preconditioner dimension mismatch");

  const DiagonalForm form = diagonalize(pencil);
  const SymmetricPencil diag = form.pencil();
  const Eigen::Index n = pencil.size();
  const Preconditioner t_diag =
      uses_exact_inverse(kind) ? Preconditioner(Matrix::Identity(n, n))
                               : Preconditioner(form.to_diagonal_operator(t.matrix()));
  const std::optional<double> gamma =
      uses_exact_inverse(kind) ? std::optional<double>(0.0) : options.certify_gamma;

  RunResult result;
  result.spectrum = form.spectrum();
  const Spectrum& spectrum = result.spectrum;

  auto make_record = [&](int index, const Vector& y) {
    IterationRecord rec;
    rec.step_index = index;
    rec.x = form.from_diagonal(y);
    rec.rho = rayleigh(pencil, rec.x);
    if (!std::isfinite(rec.rho.rho) || !std::isfinite(rec.rho.mu))
      throw NumericFailure("run: non-finite Rayleigh quotient at step " + std::to_string(index));
    const Vector ax = pencil.a() * rec.x;
    rec.residual_norm = (ax - rec.rho.rho * (pencil.b() * rec.x)).norm();
    rec.relative_residual = rec.residual_norm / ax.norm();
    const IntervalPosition pos = locate_position(spectrum, y);
    rec.interval_index = pos.index;
    if (pos.index + 1 < spectrum.size()) rec.delta = pos.delta(spectrum);
    return rec;
  };
  auto finished = [&](const IterationRecord& rec) {
    if (rec.relative_residual < options.stop.residual_tol) return true;
    return options.stop.delta_tol > 0.0 && rec.delta < options.stop.delta_tol;
  };

  Vector y = form.to_diagonal(x0);
  y /= y.norm();
  result.records.push_back(make_record(0, y));
  if (finished(result.records.back())) {
    result.status = RunStatus::converged;
    return result;
  }

  for (int k = 1; k <= options.stop.max_steps; ++k) {
    const StepResult s = step(kind, diag, t_diag, y);
    if (!s.x.allFinite()) throw NumericFailure("run: non-finite iterate at step " + std::to_string(k));
    if (s.status != StepStatus::advanced) {
      result.status = s.status == StepStatus::converged ? RunStatus::converged : RunStatus::stationary;
      return result;
    }
    IterationRecord rec = make_record(k, s.x);
    const double prev = result.records.back().rho.rho;
    if (rec.rho.rho > prev + kMonotoneTolerance * std::abs(prev)) result.monotone = false;
    if (gamma) rec.bound = certify_step(spectrum, kind, *gamma, y, s.x);
    y = s.x;
    result.records.push_back(std::move(rec));
    if (finished(result.records.back())) {
      result.status = RunStatus::converged;
      return result;
    }
  }
  result.status = RunStatus::max_steps;
  return result;
}

}  // namespace pgeig
