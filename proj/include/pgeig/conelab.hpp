// Three-dimensional geometry of preconditioned steepest descent.
//
// Everything lives in coordinates where A = I and B = diag(mu_1, mu_2, mu_3)
// with mu_1 > mu_2 > mu_3 > 0. For an iterate x with residual
// r = Bx - mu(x) x, the admissible preconditioned iterates form the ball of
// radius gamma |r| around Bx; the search lines through mu(x) x that meet the
// ball form a circular cone with half opening angle asin(gamma).
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "pgeig/bounds.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"

namespace pgeig::cone {

using Vec3 = Eigen::Vector3d;

/// Raised when x is an eigenvector, so the cone degenerates to a point.
class StationaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

inline double mu_of(const Vec3& mus, const Vec3& x) {
  return x.dot(mus.cwiseProduct(x)) / x.squaredNorm();
}

/// Cone of admissible search directions at x.
struct ConeSpec {
  Vec3 mus;
  Vec3 x;
  double mu_x = 0.0;
  Vec3 r;  // Bx - mu(x) x
  double gamma = 0.0;

  Vec3 center() const { return mus.cwiseProduct(x); }  // Bx
  double radius() const { return gamma * r.norm(); }
  double opening_angle() const { return std::asin(gamma); }
};

namespace detail {

inline void check_mus(const Vec3& mus) {
  if (!(mus(0) > mus(1) && mus(1) > mus(2) && mus(2) > 0.0))
    throw DomainError("cone: need mu_1 > mu_2 > mu_3 > 0");
}

}  // namespace detail

inline ConeSpec make_cone(const Vec3& mus, const Vec3& x, double gamma) {
  detail::check_mus(mus);
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("cone: gamma must lie in [0,1]");
  if (x.squaredNorm() == 0.0) throw DomainError("cone: zero vector");
  ConeSpec c{mus, x, mu_of(mus, x), Vec3::Zero(), gamma};
  for (int m = 0; m < 3; ++m) c.r(m) = (mus(m) - c.mu_x) * x(m);
  return c;
}

/// Disc cut from the cone by the plane orthogonal to r through mu(x) x + (1 - gamma^2) r.
struct CrossSection {
  Vec3 center;
  double radius = 0.0;  // gamma sqrt(1 - gamma^2) |r|
  Vec3 axis;            // r / |r|
  Vec3 v;               // (x cross r) / (|x| |r|)
};

inline CrossSection cross_section(const ConeSpec& c) {
  const double rn = c.r.norm();
  if (rn <= 1e-14 * c.center().norm()) throw StationaryError("cone: x is an eigenvector (zero residual)");
  const double g = c.gamma;
  CrossSection s;
  s.center = c.mu_x * c.x + (1.0 - g * g) * c.r;
  s.radius = g * std::sqrt(1.0 - g * g) * rn;
  s.axis = c.r / rn;
  s.v = c.x.cross(c.r) / (c.x.norm() * rn);
  return s;
}

/// The two points where the x-orthogonal diameter of the cross section meets the cone surface.
inline std::pair<Vec3, Vec3> extremal_directions(const ConeSpec& c) {
  const CrossSection s = cross_section(c);
  return {s.center + s.radius * s.v, s.center - s.radius * s.v};
}

/// worst_direction(c) - mu(x) x, formed without the cancellation of the x term.
inline Vec3 worst_search_direction(const ConeSpec& c) {
  if ((c.x.array() < 0.0).any())
    throw DomainError("worst_direction: x must be componentwise nonnegative (apply householder_reduce)");
  cross_section(c);  // stationary check
  const double g = c.gamma;
  return (1.0 - g * g) * c.r + g * std::sqrt(1.0 - g * g) * c.x.cross(c.r) / c.x.norm();
}

/// The cone-boundary direction of poorest convergence for componentwise nonnegative x
/// with mu_2 < mu(x) < mu_1: mu(x) x + (1 - gamma^2) r + gamma sqrt(1 - gamma^2) (x cross r) / |x|.
inline Vec3 worst_direction(const ConeSpec& c) { return c.mu_x * c.x + worst_search_direction(c); }

// ---------------------------------------------------------------------------
// Ritz values on span{x, d}

/// Orthonormal pair [x/|x|, dbar] spanning span{x, d}.
inline std::pair<Vec3, Vec3> orthonormal_pair(const Vec3& x, const Vec3& d) {
  const Vec3 xh = x.normalized();
  Vec3 dbar = d - d.dot(xh) * xh;
  dbar -= dbar.dot(xh) * xh;
  const double dn = dbar.norm();
  if (dn <= 1e-12 * d.norm()) throw DegenerateSubspaceError(1, 2);
  return {xh, dbar / dn};
}

/// Larger eigenvalue of [[mu(x), (dbar,Bx)], [(dbar,Bx), mu(dbar)]] for orthonormal x, dbar.
inline double larger_ritz_value(const Vec3& mus, const Vec3& x, const Vec3& d) {
  const auto [xh, dbar] = orthonormal_pair(x, d);
  const double mx = xh.dot(mus.cwiseProduct(xh));
  const double md = dbar.dot(mus.cwiseProduct(dbar));
  const double off = dbar.dot(mus.cwiseProduct(xh));
  return 0.5 * (mx + md) + std::sqrt(0.25 * (mx - md) * (mx - md) + off * off);
}

/// theta_2 - shift for the larger Ritz value theta_2 on span{x, d}, computed from
/// the shifted projection with entries sum (mu_m - shift) u_m v_m. With shift = mu_1
/// the projection is negative semidefinite and the result keeps full relative
/// accuracy even when theta_2 is within rounding of mu_1.
inline double larger_ritz_shifted(const Vec3& mus, const Vec3& x, const Vec3& d, double shift) {
  const auto [xh, dbar] = orthonormal_pair(x, d);
  const Vec3 sh = mus.array() - shift;
  const double m11 = xh.dot(sh.cwiseProduct(xh));
  const double m22 = dbar.dot(sh.cwiseProduct(dbar));
  const double m12 = xh.dot(sh.cwiseProduct(dbar));
  const double mean = 0.5 * (m11 + m22);
  const double rad = std::hypot(0.5 * (m11 - m22), m12);
  if (mean <= 0.0) {
    const double lo = mean - rad;
    if (lo == 0.0) return 0.0;
    return (m11 * m22 - m12 * m12) / lo;
  }
  return mean + rad;
}

/// Larger Ritz value on span{x, d(t)}, d(t) = t d_1 + (1 - t) d_2, from the explicit
/// 2x2 formula and from the general Rayleigh-Ritz routine.
struct SegmentRitz {
  double closed_form = 0.0;
  double projected = 0.0;
};

inline Vec3 segment_point(const ConeSpec& c, double t) {
  const auto [d1, d2] = extremal_directions(c);
  return t * d1 + (1.0 - t) * d2;
}

inline SegmentRitz ritz_on_segment(const ConeSpec& c, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("ritz_on_segment: t must lie in [0,1]");
  const Vec3 d = segment_point(c, t);
  SegmentRitz out;
  out.closed_form = larger_ritz_value(c.mus, c.x, d - c.mu_x * c.x);

  const SymmetricPencil pencil(Matrix::Identity(3, 3), Matrix(c.mus.asDiagonal()));
  Matrix basis(3, 2);
  basis.col(0) = c.x;
  basis.col(1) = d;
  out.projected = rayleigh_ritz(pencil, basis).front().value.mu;
  return out;
}

/// Brute-force minimum of the larger Ritz value over the cross-section disc.
struct ConeMinimum {
  double min_ritz = std::numeric_limits<double>::infinity();
  Vec3 argmin_direction = Vec3::Zero();  // a point d of the cone; the search line is span{x, d}
};

/// Samples the disc by angle (uniform on [0, 2 pi)) and radial fraction
/// {0.25, 0.5, 0.75, 1}; n_samples is the total count.
inline ConeMinimum brute_force_cone_min(const ConeSpec& c, int n_samples) {
  if (n_samples < 100) throw DomainError("brute_force_cone_min: need at least 100 samples");
  constexpr std::array<double, 4> fractions{0.25, 0.5, 0.75, 1.0};
  const CrossSection s = cross_section(c);
  const Vec3 xh = c.x.normalized();
  const int n_angles = n_samples / static_cast<int>(fractions.size());
  ConeMinimum best;
  for (int k = 0; k < n_angles; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_angles;
    const Vec3 y = std::cos(phi) * s.v + std::sin(phi) * xh;
    for (double f : fractions) {
      const Vec3 d = s.center + f * s.radius * y;
      const double value = larger_ritz_value(c.mus, c.x, d - c.mu_x * c.x);
      if (value < best.min_ritz) {
        best.min_ritz = value;
        best.argmin_direction = d;
      }
    }
  }
  return best;
}

/// Sign flips making x componentwise nonnegative; signs[m] * x(m) = x_nonneg(m).
struct Reflected {
  Vec3 x_nonneg;
  std::array<int, 3> signs{};
};

inline Reflected householder_reduce(const Vec3& x) {
  Reflected out{x, {1, 1, 1}};
  for (int m = 0; m < 3; ++m)
    if (x(m) < 0.0) {
      out.x_nonneg(m) = -x(m);
      out.signs[static_cast<std::size_t>(m)] = -1;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Worst-case instances on the level set

/// 3D sharpness instance: eigenvalues mu_j > mu_k > mu_l of B, quality gamma,
/// level Delta = (mu_j - mu)/(mu - mu_k) of the iterate, and t = tan(psi)
/// selecting the point x = (1, alpha0, beta0) on the level-set ellipse.
struct WorstCaseSetup {
  Vec3 mus;
  double gamma = 0.0;
  double delta = 0.0;
  double t = 0.0;

  // derived
  double mu = 0.0;      // mu(x)
  double gap_j = 0.0;   // mu_j - mu
  double gap_k = 0.0;   // mu - mu_k
  double gap_l = 0.0;   // mu - mu_l
  double a = 0.0;
  double b = 0.0;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double kappa = 0.0;        // (mu_k - mu_l) / (mu_j - mu_l)
  double big_gamma = 0.0;    // sqrt(1 - gamma^2) / gamma, infinite for gamma = 0
  Vec3 x = Vec3::Zero();
};

inline double t1(double kappa, double gamma) {
  return std::sqrt(1.0 - kappa) * (1.0 - gamma) / std::sqrt(1.0 - gamma * gamma);
}

inline WorstCaseSetup make_setup(const Vec3& mus, double gamma, double delta, double t) {
  detail::check_mus(mus);
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("setup: gamma must lie in [0,1]");
  if (!(delta > 0.0)) throw DomainError("setup: Delta must be positive");
  if (!(t > 0.0)) throw DomainError("setup: t must be positive");
  WorstCaseSetup s;
  s.mus = mus;
  s.gamma = gamma;
  s.delta = delta;
  s.t = t;
  const double jk = mus(0) - mus(1);
  s.gap_k = jk / (1.0 + delta);
  s.gap_j = delta * s.gap_k;
  s.gap_l = s.gap_k + (mus(1) - mus(2));
  s.mu = mus(1) + s.gap_k;
  s.a = std::sqrt(delta);
  s.b = std::sqrt(s.gap_j / s.gap_l);
  s.alpha0 = s.a / std::sqrt(1.0 + t * t);
  s.beta0 = s.b * t / std::sqrt(1.0 + t * t);
  s.kappa = (mus(1) - mus(2)) / (mus(0) - mus(2));
  s.big_gamma = gamma == 0.0 ? std::numeric_limits<double>::infinity()
                             : std::sqrt(1.0 - gamma * gamma) / gamma;
  s.x = Vec3(1.0, s.alpha0, s.beta0);
  return s;
}

/// Cone at the setup's x, with r assembled from the exact gaps rather than from mu(x).
inline ConeSpec setup_cone(const WorstCaseSetup& s) {
  ConeSpec c{s.mus, s.x, s.mu, Vec3(s.gap_j, -s.gap_k * s.alpha0, -s.gap_l * s.beta0), s.gamma};
  return c;
}

struct WorstCaseResult {
  Vec3 x;
  Vec3 d;
  double predicted_ratio = 0.0;  // sigma^2
  double measured_ratio = 0.0;   // Delta(mu') / Delta(mu)
  double mu_next = 0.0;          // larger Ritz value mu' on span{x, d}
};

/// Builds the worst-case iterate and direction and measures the Delta contraction.
inline WorstCaseResult worst_case_instance(const WorstCaseSetup& s) {
  if (!(s.gamma >= 0.0 && s.gamma < 1.0)) throw DomainError("worst_case_instance: gamma must lie in [0,1)");
  if (!(s.delta > 0.0) || !(s.t > 0.0)) throw DomainError("worst_case_instance: need Delta > 0 and t > 0");
  const ConeSpec c = setup_cone(s);
  WorstCaseResult out;
  out.x = s.x;
  out.d = worst_direction(c);
  const double sig = sigma_psd(s.kappa, s.gamma);
  out.predicted_ratio = sig * sig;

  const double shift = larger_ritz_shifted(s.mus, s.x, worst_search_direction(c), s.mus(0));
  out.mu_next = s.mus(0) + shift;
  const double jk = s.mus(0) - s.mus(1);
  const double delta_next = -shift / (shift + jk);
  // Delta of x itself, evaluated componentwise.
  double below = 0.0, above = 0.0;
  for (int m = 0; m < 3; ++m) {
    below += (s.mus(0) - s.mus(m)) * s.x(m) * s.x(m);
    above += (s.mus(m) - s.mus(1)) * s.x(m) * s.x(m);
  }
  out.measured_ratio = delta_next / (below / above);
  return out;
}

/// Intersections S_1 = (1, c_k, 0), S_2 = (1, 0, c_l) of span{x, d} with the
/// coordinate lines of the plane x_1 = 1, and the squared axis ratio of the
/// level-set-shaped ellipse tangent to the line S_1 S_2.
struct EllipseQuantities {
  double c_k = 0.0;
  double c_l = 0.0;  // infinite when cl_infinite
  double axis_ratio = 0.0;
  bool cl_infinite = false;
};

inline EllipseQuantities ellipse_quantities(const WorstCaseSetup& s) {
  if (!(s.gamma > 0.0)) throw DomainError("ellipse_quantities: gamma = 0 has no finite Gamma");
  const double nx = s.x.norm();
  const double g = s.big_gamma;
  const double mj = s.mus(0), mk = s.mus(1), ml = s.mus(2);
  const double num = nx * s.gap_j + g * s.alpha0 * s.beta0 * (mk - ml);
  const double den_k = nx * s.alpha0 * s.gap_k + g * s.beta0 * (mj - ml);
  const double den_l = nx * s.beta0 * s.gap_l + g * s.alpha0 * (mk - mj);
  EllipseQuantities e;
  e.c_k = num / den_k;
  const double ck2 = e.c_k * e.c_k;
  if (std::abs(den_l) < 1e-12 * std::abs(num)) {
    e.cl_infinite = true;
    e.c_l = std::numeric_limits<double>::infinity();
    e.axis_ratio = ck2 / (s.b * s.b);
    return e;
  }
  e.c_l = num / den_l;
  const double cl2 = e.c_l * e.c_l;
  e.axis_ratio = ck2 * cl2 / (s.b * s.b * ck2 + s.a * s.a * cl2);
  return e;
}

/// a^2 / a~^2 as a function of the level Delta, the level-set parameter t, kappa
/// and Gamma = sqrt(1 - gamma^2) / gamma. Increasing in Delta; its minimum over
/// t at Delta = 0 is attained at t1 and equals 1 / sigma^2.
inline double level_set_objective(double delta, double t, double kappa, double big_gamma) {
  const double g = big_gamma;
  const double omk = 1.0 - kappa;
  const double root = std::sqrt(1.0 + t * t + kappa * delta);
  const double cross = kappa * g * t * std::sqrt(1.0 / (1.0 + t * t)) * std::sqrt(1.0 + delta);
  const double numerator = (1.0 + delta) * (g * g * omk * omk + kappa * omk + g * g * t * t) + omk * omk +
                           t * t * omk + 2.0 * cross * root * std::sqrt(omk);
  const double denom = std::sqrt(omk) * root + cross;
  return numerator / (denom * denom);
}

}  // namespace pgeig::cone
