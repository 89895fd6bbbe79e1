// Sharp convergence factors of the gradient eigensolver hierarchy and
// per-step certification against a known spectrum.
//
// All estimates share the form Delta(rho') <= sigma^2 Delta(rho) with
// Delta(xi) = (xi - lambda_i) / (lambda_{i+1} - xi) on the interval
// lambda_i <= rho < lambda_{i+1}. Indices are 0-based throughout.
#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"
#include "pgeig/solver_kind.hpp"

namespace pgeig {

/// Relative slack granted to the bound comparison for rounding noise.
inline constexpr double kBoundTolerance = 1e-9;
/// Relative increase of rho that still counts as monotone.
inline constexpr double kMonotoneTolerance = 1e-12;

/// (xi - lambda_i) / (lambda_{i+1} - xi) for lambda_i <= xi < lambda_{i+1}.
inline double delta(const Spectrum& spectrum, Eigen::Index i, double xi) {
  if (i < 0 || i + 1 >= spectrum.size()) throw DomainError("delta: interval index out of range");
  const double lo = spectrum.lambda(i);
  const double hi = spectrum.lambda(i + 1);
  if (!(xi >= lo && xi < hi))
    throw DomainError("delta: value " + std::to_string(xi) + " outside [lambda_i, lambda_{i+1})");
  return (xi - lo) / (hi - xi);
}

/// Largest i with lambda_i <= rho; n-1 when rho >= lambda_n, 0 when rho < lambda_1.
inline Eigen::Index locate_interval(const Spectrum& spectrum, double rho) {
  Eigen::Index i = 0;
  while (i + 1 < spectrum.size() && spectrum.lambda(i + 1) <= rho) ++i;
  return i;
}

namespace detail {

inline double kappa_unchecked(const Spectrum& s, Eigen::Index i) {
  const Eigen::Index n = s.size();
  const double mu_n = s.mu(n - 1);
  const double denom = s.mu(i) - mu_n;
  if (denom <= 0.0) return 0.0;
  return (s.mu(i + 1) - mu_n) / denom;
}

}  // namespace detail

/// kappa = lambda_i (lambda_n - lambda_{i+1}) / (lambda_{i+1} (lambda_n - lambda_i)).
///
/// Requires i+1 < n-1 and lambda_i < lambda_{i+1} < lambda_n, the case in which
/// the PSD estimate is attainable.
inline double kappa(const Spectrum& spectrum, Eigen::Index i) {
  const Eigen::Index n = spectrum.size();
  if (i < 0 || i + 1 >= n) throw DomainError("kappa: interval index out of range");
  if (i + 1 == n - 1)
    throw DomainError("kappa: i+1 = n leaves no third eigenvalue; the estimate degenerates to kappa = 0");
  const double li = spectrum.lambda(i);
  const double lj = spectrum.lambda(i + 1);
  const double ln = spectrum.lambda(n - 1);
  if (!(li < lj && lj < ln)) throw DomainError("kappa: needs lambda_i < lambda_{i+1} < lambda_n");
  return li * (ln - lj) / (lj * (ln - li));
}

/// The same quantity from the reciprocals: (mu_{i+1} - mu_n) / (mu_i - mu_n).
inline double kappa_mu_form(const Spectrum& spectrum, Eigen::Index i) {
  kappa(spectrum, i);  // validation
  return detail::kappa_unchecked(spectrum, i);
}

/// (kappa + gamma (2 - kappa)) / ((2 - kappa) + gamma kappa).
inline double sigma_psd(double kappa_value, double gamma) {
  return (kappa_value + gamma * (2.0 - kappa_value)) / ((2.0 - kappa_value) + gamma * kappa_value);
}

inline double sigma_pinvit1(double lambda_ratio, double gamma) {
  return gamma + (1.0 - gamma) * lambda_ratio;
}

struct BoundFactors {
  Eigen::Index interval_index = 0;
  double kappa = 0.0;
  double sigma_invit1 = 0.0;
  double sigma_pinvit1 = 0.0;
  double sigma_invit2 = 0.0;
  double sigma_psd = 0.0;

  double sigma(SolverKind kind) const {
    switch (kind) {
      case SolverKind::invit1: return sigma_invit1;
      case SolverKind::pinvit1: return sigma_pinvit1;
      case SolverKind::invit2: return sigma_invit2;
      case SolverKind::psd: return sigma_psd;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

namespace detail {

inline BoundFactors factors_from_kappa(const Spectrum& s, Eigen::Index i, double k, double gamma) {
  const double ratio = s.lambda(i) / s.lambda(i + 1);
  return {i, k, ratio, sigma_pinvit1(ratio, gamma), sigma_psd(k, 0.0), sigma_psd(k, gamma)};
}

inline void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [0,1]");
}

}  // namespace detail

/// All four factors for the interval i. Validates like kappa().
inline BoundFactors bound_factors(const Spectrum& spectrum, Eigen::Index i, double gamma) {
  detail::check_gamma(gamma);
  return detail::factors_from_kappa(spectrum, i, kappa(spectrum, i), gamma);
}

/// Sharp factor sigma for `kind`; gamma is ignored for the exact-inverse kinds.
inline double sigma(SolverKind kind, const Spectrum& spectrum, Eigen::Index i, double gamma) {
  detail::check_gamma(gamma);
  if (i < 0 || i + 1 >= spectrum.size()) throw DomainError("sigma: interval index out of range");
  if (kind == SolverKind::invit1 || kind == SolverKind::pinvit1) {
    const double ratio = spectrum.lambda(i) / spectrum.lambda(i + 1);
    return kind == SolverKind::invit1 ? ratio : sigma_pinvit1(ratio, gamma);
  }
  const double k = kappa(spectrum, i);
  return sigma_psd(k, kind == SolverKind::invit2 ? 0.0 : gamma);
}

// ---------------------------------------------------------------------------
// Certification

enum class Verdict {
  holds,            // Delta ratio within sigma^2
  passed_lambda_i,  // rho' <= lambda_i, the first alternative of the estimate
  violated,
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::passed_lambda_i: return "passed_lambda_i";
    case Verdict::violated: return "violated";
  }
  return "?";
}

struct BoundCheck {
  Eigen::Index interval_index = 0;
  double delta_before = std::numeric_limits<double>::quiet_NaN();
  double delta_after = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double sigma_squared = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::holds;
  double slack = std::numeric_limits<double>::quiet_NaN();  // sigma_squared - ratio
  std::string diagnostic;
};

/// Position of an iterate relative to its eigenvalue interval, evaluated
/// without cancellation from diagonal coordinates.
///
/// For y in coordinates where A = I and B = diag(mu), `below` is the weighted
/// sum of (mu_i - mu_k) y_k^2 (proportional to rho - lambda_i, up to a positive
/// factor) and `above` the sum of (mu_k - mu_{i+1}) y_k^2.
struct IntervalPosition {
  Eigen::Index index = 0;
  double below = 0.0;
  double above = 0.0;

  /// Delta in lambda form; mu and lambda forms differ by the constant factor lambda_i / lambda_{i+1}.
  double delta(const Spectrum& s) const {
    return below / above * (s.mu(index + 1) / s.mu(index));
  }
};

namespace detail {

inline double weighted_gap(const Spectrum& s, const Vector& y, double pivot) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) sum += (pivot - s.mu(k)) * y(k) * y(k);
  return sum;
}

}  // namespace detail

/// Relative to interval `index`; the iterate may lie outside of it.
inline IntervalPosition position_in_interval(const Spectrum& s, const Vector& y, Eigen::Index index) {
  if (y.size() != s.size()) throw DomainError("position: dimension mismatch");
  IntervalPosition p;
  p.index = index;
  p.below = detail::weighted_gap(s, y, s.mu(index));
  p.above = index + 1 < s.size() ? -detail::weighted_gap(s, y, s.mu(index + 1))
                                 : std::numeric_limits<double>::infinity();
  return p;
}

/// Locates the largest i with lambda_i <= rho(y).
inline IntervalPosition locate_position(const Spectrum& s, const Vector& y) {
  Eigen::Index i = 0;
  while (i + 1 < s.size() && detail::weighted_gap(s, y, s.mu(i + 1)) >= 0.0) ++i;
  return position_in_interval(s, y, i);
}

namespace detail {

inline double certified_sigma(SolverKind kind, const Spectrum& s, Eigen::Index i, double gamma) {
  check_gamma(gamma);
  const BoundFactors f = factors_from_kappa(s, i, kappa_unchecked(s, i), gamma);
  return f.sigma(kind);
}

inline BoundCheck judge(SolverKind kind, const Spectrum& s, double gamma, Eigen::Index i,
                        double delta_before, bool after_at_or_below_lambda_i, double delta_after,
                        bool monotone) {
  BoundCheck check;
  check.interval_index = i;
  check.delta_before = delta_before;
  if (!monotone) {
    check.verdict = Verdict::violated;
    check.diagnostic = "Rayleigh quotient increased";
    return check;
  }
  if (i + 1 >= s.size() || after_at_or_below_lambda_i) {
    check.verdict = Verdict::passed_lambda_i;
    if (!after_at_or_below_lambda_i) check.diagnostic = "iterate at the largest eigenvalue";
    return check;
  }
  const double sig = certified_sigma(kind, s, i, gamma);
  check.sigma_squared = sig * sig;
  check.delta_after = delta_after;
  check.ratio = delta_after / delta_before;
  check.slack = check.sigma_squared - check.ratio;
  if (!(check.ratio <= check.sigma_squared * (1.0 + kBoundTolerance))) {
    check.verdict = Verdict::violated;
    check.diagnostic = "Delta ratio " + std::to_string(check.ratio) + " exceeds sigma^2 " +
                       std::to_string(check.sigma_squared);
  }
  return check;
}

}  // namespace detail

/// Certifies one step from its Rayleigh quotients (lambda form).
///
/// Either rho_after <= lambda_i or Delta(rho_after) / Delta(rho_before) <= sigma^2,
/// with sigma chosen by `kind`. An increase of rho is reported as a violation.
inline BoundCheck certify_step(const Spectrum& spectrum, SolverKind kind, double gamma,
                               const RayleighValue& before, const RayleighValue& after) {
  const Eigen::Index i = locate_interval(spectrum, before.rho);
  const bool monotone = after.rho <= before.rho + kMonotoneTolerance * std::abs(before.rho);
  const bool passed = after.rho <= spectrum.lambda(i);
  const bool top = i + 1 >= spectrum.size();
  const double d_before = top ? std::numeric_limits<double>::infinity()
                              : (std::max(before.rho, spectrum.lambda(i)) - spectrum.lambda(i)) /
                                    (spectrum.lambda(i + 1) - before.rho);
  const double d_after =
      top || passed ? 0.0 : (after.rho - spectrum.lambda(i)) / (spectrum.lambda(i + 1) - after.rho);
  return detail::judge(kind, spectrum, gamma, i, d_before, passed, d_after, monotone);
}

/// PSD entry point.
inline BoundCheck certify_step(const Spectrum& spectrum, double gamma, const RayleighValue& before,
                               const RayleighValue& after) {
  return certify_step(spectrum, SolverKind::psd, gamma, before, after);
}

/// Certifies one step from iterates in diagonal coordinates (A = I, B = diag(mu)),
/// evaluating both Delta values without cancellation.
inline BoundCheck certify_step(const Spectrum& spectrum, SolverKind kind, double gamma,
                               const Vector& y_before, const Vector& y_after) {
  const IntervalPosition pb = locate_position(spectrum, y_before);
  const IntervalPosition pa = position_in_interval(spectrum, y_after, pb.index);
  const double rho_b = 1.0 / (y_before.dot(spectrum.mus().cwiseProduct(y_before)) / y_before.squaredNorm());
  const double rho_a = 1.0 / (y_after.dot(spectrum.mus().cwiseProduct(y_after)) / y_after.squaredNorm());
  const bool monotone = rho_a <= rho_b + kMonotoneTolerance * std::abs(rho_b);
  const bool top = pb.index + 1 >= spectrum.size();
  const bool passed = pa.below <= 0.0;
  const double d_before = top ? std::numeric_limits<double>::infinity() : pb.delta(spectrum);
  const double d_after = top || passed ? 0.0 : pa.delta(spectrum);
  return detail::judge(kind, spectrum, gamma, pb.index, d_before, passed, d_after, monotone);
}

}  // namespace pgeig
