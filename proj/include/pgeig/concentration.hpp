// Randomized two-level search for the poorest PSD convergence in n = 3..5
// dimensions, used to observe that the worst case lives in three coordinates.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pgeig/bounds.hpp"
#include "pgeig/dense/orthonormalize.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/pencil.hpp"

namespace pgeig::cone {

struct ConcentrationReport {
  Eigen::Index n = 0;
  double mu0 = 0.0;
  double gamma = 0.0;
  Eigen::Index interval_index = 0;  // mu_{i+1} < mu0 < mu_i
  int restarts = 0;
  double best_value = 0.0;    // smallest larger-Ritz value mu' found
  Vector best_x;              // unit, nonnegative, mu(best_x) = mu0
  int significant_components = 0;
  std::vector<Eigen::Index> support;
  double bound_value = 0.0;   // mu' implied by the sharp estimate for the triple (i, i+1, n)
  double excess = 0.0;        // bound_value - best_value; positive means the search beat the bound
  double tolerance = 1e-6;
  bool within_bound() const { return excess <= tolerance; }
};

namespace detail {

// Vectors of the search live in at most five dimensions; fixed capacity avoids heap traffic.
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 5, 1>;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 5, 5>;

inline double larger_ritz_nd(const SmallVec& mus, const SmallVec& xh, const SmallVec& s) {
  SmallVec sb = s - s.dot(xh) * xh;
  sb -= sb.dot(xh) * xh;
  const double sn = sb.norm();
  const double mx = xh.dot(mus.cwiseProduct(xh));
  if (sn <= 1e-14 * s.norm()) return mx;
  sb /= sn;
  const double ms = sb.dot(mus.cwiseProduct(sb));
  const double off = sb.dot(mus.cwiseProduct(xh));
  return 0.5 * (mx + ms) + std::sqrt(0.25 * (mx - ms) * (mx - ms) + off * off);
}

// Minimum over the cone at x of the larger Ritz value. Search directions are
// (1 - gamma^2) r + f y with y in the unit ball of span{x, r}^perp.
class InnerConeMin {
 public:
  InnerConeMin(const Vector& mus, double gamma, std::uint64_t seed) : mus_(mus), gamma_(gamma), rng_(seed) {}

  double operator()(const SmallVec& x_raw) {
    const Eigen::Index n = x_raw.size();
    const SmallVec xh = x_raw.normalized();
    const double mu = xh.dot(mus_.cwiseProduct(xh));
    const SmallVec r = mus_.cwiseProduct(xh) - mu * xh;
    const double rn = r.norm();
    if (rn <= 1e-14 * mus_.cwiseProduct(xh).norm()) return mu;
    const double g = gamma_;
    const SmallVec axis = (1.0 - g * g) * r;
    const double f = g * std::sqrt(1.0 - g * g) * rn;
    if (f == 0.0 || n < 3) return larger_ritz_nd(mus_, xh, axis);

    // orthonormal complement of span{x, r}
    const Eigen::Index m = n - 2;
    SmallMat q(n, m);
    {
      SmallMat basis(n, n);
      basis.col(0) = xh;
      basis.col(1) = r / rn;
      Eigen::Index rank = 2;
      for (Eigen::Index j = 0; j < n && rank < n; ++j) {
        SmallVec w = SmallVec::Unit(n, j);
        for (int pass = 0; pass < 2; ++pass)
          for (Eigen::Index k = 0; k < rank; ++k) w -= basis.col(k).dot(w) * basis.col(k);
        if (w.norm() > 1e-8) basis.col(rank++) = w.normalized();
      }
      q = basis.rightCols(m);
    }
    auto value = [&](const SmallVec& y) { return larger_ritz_nd(mus_, xh, axis + f * (q * y)); };

    double best = std::numeric_limits<double>::infinity();
    if (m == 1) {
      for (double sgn : {1.0, -1.0})
        for (double frac : {0.25, 0.5, 0.75, 1.0}) best = std::min(best, value(SmallVec::Constant(1, sgn * frac)));
      return best;
    }
    if (m == 2) return circle_min(value);
    return sphere_min(value, m);
  }

 private:
  template <class F>
  double circle_min(F& value) {
    auto at = [&](double phi, double frac) {
      SmallVec y(2);
      y << frac * std::cos(phi), frac * std::sin(phi);
      return value(y);
    };
    constexpr int kAngles = 64;
    const double step = 2.0 * std::numbers::pi / kAngles;
    double best = std::numeric_limits<double>::infinity();
    double best_phi = 0.0;
    double boundary_best = best;
    for (int k = 0; k < kAngles; ++k) {
      const double phi = step * k;
      const double v = at(phi, 1.0);
      if (v < boundary_best) {
        boundary_best = v;
        best_phi = phi;
      }
      if (k % 4 == 0)
        for (double frac : {0.25, 0.5, 0.75}) best = std::min(best, at(phi, frac));
    }
    // golden-section refinement of the boundary minimum
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_phi - step, hi = best_phi + step;
    double c1 = hi - ratio * (hi - lo), c2 = lo + ratio * (hi - lo);
    double v1 = at(c1, 1.0), v2 = at(c2, 1.0);
    while (hi - lo > 1e-10) {
      if (v1 < v2) {
        hi = c2;
        c2 = c1;
        v2 = v1;
        c1 = hi - ratio * (hi - lo);
        v1 = at(c1, 1.0);
      } else {
        lo = c1;
        c1 = c2;
        v1 = v2;
        c2 = lo + ratio * (hi - lo);
        v2 = at(c2, 1.0);
      }
    }
    return std::min({best, boundary_best, v1, v2});
  }

  template <class F>
  double sphere_min(F& value, Eigen::Index m) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    double boundary_best = best;
    SmallVec best_y(m);
    for (int k = 0; k < 256; ++k) {
      SmallVec y(m);
      for (Eigen::Index i = 0; i < m; ++i) y(i) = normal(rng_);
      y.normalize();
      const double v = value(y);
      if (v < boundary_best) {
        boundary_best = v;
        best_y = y;
      }
      if (k % 4 == 0)
        for (double frac : {0.25, 0.5, 0.75}) best = std::min(best, value(SmallVec(frac * y)));
    }
    // compass refinement on the sphere
    double step = 0.2;
    while (step > 1e-9) {
      bool improved = false;
      for (Eigen::Index i = 0; i < m && !improved; ++i)
        for (double sgn : {1.0, -1.0}) {
          SmallVec y = best_y;
          y(i) += sgn * step;
          y.normalize();
          const double v = value(y);
          if (v < boundary_best) {
            boundary_best = v;
            best_y = y;
            improved = true;
            break;
          }
        }
      if (!improved) step *= 0.5;
    }
    return std::min(best, boundary_best);
  }

  SmallVec mus_;
  double gamma_;
  std::mt19937_64 rng_;
};

}  // namespace detail

/// Two-level search: outer over x on the level set mu(x) = mu0 (restricted to
/// x >= 0, parametrized by p = x^2 on the polytope {p >= 0, sum p = 1,
/// sum mu p = mu0}), inner over the admissible cone at x.
///
/// The outer local descent is a compass search along mass exchanges between
/// three coordinates; moves that would leave the polytope are truncated onto
/// its boundary so zero coordinates are reached exactly.
inline ConcentrationReport three_d_concentration_check(const Spectrum& spectrum, double gamma, double mu0,
                                                       int n_outer, std::uint64_t seed = 1) {
  const Eigen::Index n = spectrum.size();
  if (n < 3 || n > 5) throw DomainError("concentration check: dimension must be 3, 4 or 5");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("concentration check: gamma must lie in [0,1)");
  if (n_outer < 1) throw DomainError("concentration check: need at least one restart");
  const Vector& mus = spectrum.mus();
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    if (!(mus(k) > mus(k + 1))) throw DomainError("concentration check: eigenvalues must be simple");
  Eigen::Index i = -1;
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    if (mus(k + 1) < mu0 && mu0 < mus(k)) i = k;
  if (i < 0) throw DomainError("concentration check: mu0 must lie strictly inside an eigenvalue interval");

  ConcentrationReport report;
  report.n = n;
  report.mu0 = mu0;
  report.gamma = gamma;
  report.interval_index = i;
  report.restarts = n_outer;

  // vertices of the level-set polytope
  std::vector<Vector> vertices;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      if (mus(a) > mu0 && mu0 > mus(b)) {
        Vector p = Vector::Zero(n);
        p(a) = (mu0 - mus(b)) / (mus(a) - mus(b));
        p(b) = 1.0 - p(a);
        vertices.push_back(p);
      }
  // exchange directions preserving sum p and sum mu p
  std::vector<Vector> moves;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      for (Eigen::Index c = b + 1; c < n; ++c) {
        Vector dir = Vector::Zero(n);
        dir(a) = mus(b) - mus(c);
        dir(b) = mus(c) - mus(a);
        dir(c) = mus(a) - mus(b);
        dir.normalize();
        moves.push_back(dir);
        moves.push_back(-dir);
      }

  std::mt19937_64 rng(seed);
  detail::InnerConeMin inner(mus, gamma, seed ^ 0x9e3779b97f4a7c15ULL);
  auto objective = [&](const Vector& p) { return inner(detail::SmallVec(p.cwiseMax(0.0).cwiseSqrt())); };

  report.best_value = std::numeric_limits<double>::infinity();
  Vector best_p;
  std::gamma_distribution<double> weight(1.0, 1.0);
  for (int restart = 0; restart < n_outer; ++restart) {
    Vector p = Vector::Zero(n);
    double total = 0.0;
    for (const Vector& v : vertices) {
      const double w = weight(rng);
      p += w * v;
      total += w;
    }
    p /= total;
    double value = objective(p);
    double step = 0.25;
    while (step > 1e-10) {
      bool improved = false;
      for (const Vector& dir : moves) {
        double h = step;
        Eigen::Index blocking = -1;
        for (Eigen::Index k = 0; k < n; ++k)
          if (dir(k) < 0.0 && p(k) + h * dir(k) < 0.0) {
            h = -p(k) / dir(k);
            blocking = k;
          }
        if (h <= 0.0) continue;
        Vector trial = p + h * dir;
        if (blocking >= 0) trial(blocking) = 0.0;
        trial = trial.cwiseMax(0.0);
        const double v = objective(trial);
        if (v < value - 1e-15) {
          value = v;
          p = trial;
          improved = true;
        }
      }
      if (!improved) step *= 0.5;
    }
    if (value < report.best_value) {
      report.best_value = value;
      best_p = p;
    }
  }

  report.best_x = best_p.cwiseMax(0.0).cwiseSqrt();
  report.best_x.normalize();
  for (Eigen::Index k = 0; k < n; ++k)
    if (report.best_x(k) > 1e-6) report.support.push_back(k);
  report.significant_components = static_cast<int>(report.support.size());

  // sharp estimate on the interval (mu_{i+1}, mu_i) with kappa from mu_n
  const double k = pgeig::detail::kappa_unchecked(spectrum, i);
  const double sig = sigma_psd(k, gamma);
  const double delta0 = (mus(i) - mu0) / (mu0 - mus(i + 1));
  const double q = sig * sig * delta0;
  report.bound_value = (mus(i) + q * mus(i + 1)) / (1.0 + q);
  report.excess = report.bound_value - report.best_value;
  return report;
}

}  // namespace pgeig::cone
