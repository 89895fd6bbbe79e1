// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pgeig/concentration.hpp"
#include "pgeig/conelab.hpp"
#include "pgeig/experiment.hpp"
#include "pgeig/pgeig.hpp"

namespace ex = pgeig::experiment;
namespace cone = pgeig::cone;
using cone::Vec3;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

// Random descending mus and positive x with mu_2 < mu(x) < mu_1.
struct Instance {
  Vec3 mus, x;
  double gamma;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  const double m1 = 0.4 + 0.6 * u(rng);
  const double m2 = m1 * (0.2 + 0.6 * u(rng));
  const double m3 = m2 * (0.2 + 0.6 * u(rng));
  in.mus = Vec3(m1, m2, m3);
  do {
    in.x = Vec3(0.05 + u(rng), 0.05 + u(rng), 0.05 + u(rng));
  } while (cone::mu_of(in.mus, in.x) <= m2);
  in.gamma = 0.05 + 0.9 * u(rng);
  return in;
}

ex::ExperimentConfig sweep(pgeig::SolverKind kind) {
  ex::ExperimentConfig c;
  c.command = "certify";
  c.problem = "random:20";
  c.seed = 20240601;
  c.trials = 200;
  c.gammas = {0.0, 0.3, 0.6, 0.9};
  c.solvers = {kind};
  return c;
}

// Independent recheck of every certified record: ratio within sigma^2 (1 + 1e-9) or verdict passed_lambda_i.
Outcome bound_validity(pgeig::SolverKind kind, double time_limit) {
  const auto start = std::chrono::steady_clock::now();
  const ex::ExperimentReport r = ex::cmd_certify(sweep(kind));
  const double elapsed = seconds_since(start);
  int bad = 0, certified = 0;
  for (const ex::Record& rec : r.records) {
    if (rec.verdict == "holds") {
      ++certified;
      if (!(rec.ratio <= rec.sigma_sq * (1 + 1e-9))) ++bad;
    } else if (rec.verdict == "passed_lambda_i") {
      ++certified;
    } else if (rec.verdict != "start") {
      ++bad;
    }
  }
  Outcome o;
  o.pass = bad == 0 && r.summary.violated == 0 && r.summary.skipped == 0 && certified > 0 &&
           (time_limit <= 0.0 || elapsed < time_limit);
  o.detail = std::to_string(r.summary.runs) + " runs, " + std::to_string(certified) + " certified steps, " +
             std::to_string(r.summary.violated + bad) + " violations, " + fmt("max ratio/sigma^2 - 1 = %.3e, %.2f s",
                                                                             r.summary.max_ratio_over_sigma_sq - 1.0, elapsed);
  return o;
}

Outcome criterion1() { return bound_validity(pgeig::SolverKind::psd, 10.0); }
Outcome criterion2() { return bound_validity(pgeig::SolverKind::pinvit1, 0.0); }

Outcome criterion3() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  double worst = 0.0;
  // hand values for mu = (1, 0.5, 0.1), gamma = 0.5
  const double k = 4.0 / 9.0;
  ok &= std::abs(pgeig::sigma_psd(k, 0.5) - 11.0 / 16.0) < 1e-15;
  for (const Vec3& mus : {Vec3(1.0, 0.5, 0.1), Vec3(2.0, 1.0, 0.25)})
    for (double g : {0.2, 0.5, 0.8}) {
      const double kk = (mus(1) - mus(2)) / (mus(0) - mus(2));
      const auto w = cone::worst_case_instance(cone::make_setup(mus, g, 1e-8, cone::t1(kk, g)));
      const double rel = std::abs(w.measured_ratio / w.predicted_ratio - 1.0);
      worst = std::max(worst, rel);
      ok &= rel < 1e-3 && w.measured_ratio <= w.predicted_ratio * (1 + 1e-9);
      if (mus(0) == 1.0 && g == 0.5) ok &= w.predicted_ratio == 0.47265625;
    }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 1.0, fmt("worst relative gap %.3e over 6 cases, %.4f s", worst, elapsed)};
}

Outcome criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 0.95);
  double worst = -1e300;
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 6 + trial % 7;
    const pgeig::SymmetricPencil p(oracle::random_spd(n, rng), oracle::random_spd(n, rng));
    const auto form = pgeig::diagonalize(p);
    const auto t = pgeig::synthetic_gamma_preconditioner(form, u(rng), rng());
    const pgeig::Vector x = oracle::random_vector(n, rng);
    const double psd = pgeig::psd_step(p, t, x).rho.rho;
    const double pinvit = pgeig::pinvit1_step(p, t, x).rho.rho;
    const double excess = (psd - pinvit) / pinvit;
    worst = std::max(worst, excess);
    ok &= psd <= pinvit + 1e-12 * pinvit;
  }
  return {ok, fmt("max (rho_psd - rho_pinvit1) / rho_pinvit1 = %.3e on 100 triples", worst)};
}

Outcome criterion5() {
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Instance in = random_instance(rng);
    const cone::ConeSpec c = cone::make_cone(in.mus, in.x, in.gamma);
    const double closed = cone::larger_ritz_value(in.mus, in.x, cone::worst_search_direction(c));
    const double brute = cone::brute_force_cone_min(c, 10000).min_ritz;
    worst = std::max(worst, std::abs(closed - brute));
  }
  return {worst <= 1e-8, fmt("max |closed form - brute force| = %.3e on 50 instances", worst)};
}

Outcome criterion6() {
  std::mt19937_64 rng(6);
  int misses = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Instance in = random_instance(rng);
    const cone::ConeSpec c = cone::make_cone(in.mus, in.x, in.gamma);
    int arg = 0;
    double best = 1e300;
    for (int k = 0; k <= 1000; ++k) {
      const double v = cone::ritz_on_segment(c, k / 1000.0).closed_form;
      if (v < best) {
        best = v;
        arg = k;
      }
    }
    if (arg != 0 && arg != 1000) ++misses;
  }
  return {misses == 0, std::to_string(misses) + " of 100 grid minima off the endpoints"};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  double e49 = 0.0, enorm = 0.0, esign = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = random_instance(rng);
    in.x.normalize();
    const cone::ConeSpec c = cone::make_cone(in.mus, in.x, in.gamma);
    const auto [d1, d2] = cone::extremal_directions(c);
    const double g = in.gamma, rn = c.r.norm();
    const double off = std::sqrt(1.0 - g * g) * rn;
    for (const Vec3& d : {d1, d2}) {
      const Vec3 dbar = (d - d.dot(in.x) * in.x).normalized();
      e49 = std::max(e49, std::abs(dbar.dot(in.mus.cwiseProduct(in.x)) - off) / off);
      const double n2 = (1.0 - g * g) * rn * rn;
      enorm = std::max(enorm, std::abs((d - c.mu_x * in.x).squaredNorm() - n2) / n2);
    }
    const Vec3& m = in.mus;
    const double lhs = c.r.dot(m.cwiseProduct(in.x.cross(c.r)));
    const double rhs = -in.x(0) * in.x(1) * in.x(2) * (m(0) - m(1)) * (m(0) - m(2)) * (m(1) - m(2));
    esign = std::max(esign, std::abs(lhs - rhs) / std::abs(rhs));
  }
  const bool ok = e49 <= 1e-12 && enorm <= 1e-12 && esign <= 1e-12;
  return {ok, fmt("relative errors: off-diagonal %.2e, norm %.2e, sign %.2e", e49, enorm, esign)};
}

Outcome criterion8() {
  ex::ExperimentConfig c = sweep(pgeig::SolverKind::psd);
  c.trials = 50;
  c.gammas = {0.0};
  c.precond = "exact";
  const ex::ExperimentReport r = ex::cmd_certify(c);
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < c.trials; ++trial) {
    std::mt19937_64 rng(*c.seed + static_cast<std::uint64_t>(trial));
    const auto pencil = ex::build_problem(c.problem, &rng);
    std::vector<double> l;
    for (Eigen::Index k = 0; k < pencil.size(); ++k) l.push_back(pencil.known_spectrum()->lambda(k));
    for (const ex::Record& rec : r.records) {
      if (rec.trial != trial || rec.verdict == "start") continue;
      if (rec.verdict == "passed_lambda_i") continue;
      if (rec.verdict != "holds") {
        ++bad;
        continue;
      }
      // the factor for the interval holding the step's start, recomputed from the eigenvalues
      const double rho = r.records[static_cast<std::size_t>(&rec - r.records.data()) - 1].rho;
      std::size_t i = 0;
      while (i + 1 < l.size() && !(l[i] <= rho && rho < l[i + 1])) ++i;
      const double ln = l.back();
      const double k = l[i] * (ln - l[i + 1]) / (l[i + 1] * (ln - l[i]));
      const double bound = std::pow(k / (2.0 - k), 2);
      worst = std::max(worst, rec.ratio / bound);
      if (!(rec.ratio <= bound * (1 + 1e-9))) ++bad;
      ++checked;
    }
  }
  const bool ok = bad == 0 && checked > 0 && r.summary.skipped == 0;
  return {ok, std::to_string(checked) + " steps checked, " + std::to_string(bad) +
                  fmt(" failures, max ratio / (kappa/(2-kappa))^2 = %.12f", worst)};
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  double scale_err = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 8;
    const pgeig::SymmetricPencil p(oracle::random_spd(n, rng), oracle::random_spd(n, rng));
    const auto form = pgeig::diagonalize(p);
    const auto t = pgeig::synthetic_gamma_preconditioner(form, 0.6, rng());
    const pgeig::Vector x = oracle::random_vector(n, rng);
    const auto base = pgeig::psd_step(p, t, x);
    for (double c : {0.1, 10.0}) {
      const auto scaled = pgeig::psd_step(p, t.scaled(c), x);
      scale_err = std::max(scale_err, std::abs(scaled.rho.rho - base.rho.rho) / base.rho.rho);
      const pgeig::Vector a = base.x.normalized(), b = scaled.x.normalized();
      scale_err = std::max(scale_err, std::min((a - b).norm(), (a + b).norm()));
    }
  }
  const Vec3 mus(1.0, 0.5, 0.25);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double flip_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 x(u(rng), u(rng), u(rng));
    const Vec3 y = cone::householder_reduce(x).x_nonneg;
    const double a = cone::brute_force_cone_min(cone::make_cone(mus, x, 0.4), 4000).min_ritz;
    const double b = cone::brute_force_cone_min(cone::make_cone(mus, y, 0.4), 4000).min_ritz;
    flip_err = std::max(flip_err, std::abs(a - b));
  }
  return {scale_err <= 1e-12 && flip_err <= 1e-10,
          fmt("scaling: max deviation %.2e; sign flips: max cone-minimum change %.2e", scale_err, flip_err)};
}

Outcome criterion10() {
  const auto start = std::chrono::steady_clock::now();
  pgeig::Vector mus(4);
  mus << 1.0, 0.6, 0.3, 0.1;
  const auto r = cone::three_d_concentration_check(pgeig::Spectrum::from_mus(mus), 0.5, 0.8, 200, 1);
  std::printf("  concentration report: n=%ld mu0=%.3f gamma=%.2f interval=%ld restarts=%d\n", static_cast<long>(r.n),
              r.mu0, r.gamma, static_cast<long>(r.interval_index), r.restarts);
  std::printf("  best mu'=%.12f  bound mu'=%.12f  excess=%.3e  components=%d  x=(", r.best_value, r.bound_value,
              r.excess, r.significant_components);
  for (Eigen::Index k = 0; k < r.best_x.size(); ++k) std::printf("%s%.6f", k ? ", " : "", r.best_x(k));
  std::printf(")\n");
  const bool ok = r.significant_components <= 3 && r.within_bound();
  return {ok, std::to_string(r.significant_components) +
                  fmt(" significant components, excess over the 3D bound %.3e, %.2f s", r.excess, seconds_since(start))};
}

Outcome criterion11() {
  std::mt19937_64 rng(11);
  double eig_err = 0.0, trip_err = 0.0, rq_err = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 2 + trial % 11;
    const pgeig::SymmetricPencil p(oracle::random_spd(n, rng), oracle::random_spd(n, rng));
    const auto form = pgeig::diagonalize(p);
    const Eigen::VectorXd ref = oracle::generalized_eigenvalues(p.a(), p.b());
    const pgeig::Spectrum s = form.spectrum();
    for (Eigen::Index k = 0; k < n; ++k) eig_err = std::max(eig_err, std::abs(s.lambda(k) - ref(k)) / ref(k));
    const pgeig::Vector x = oracle::random_vector(n, rng);
    const pgeig::Vector y = form.to_diagonal(x);
    trip_err = std::max(trip_err, (form.from_diagonal(y) - x).norm() / x.norm());
    const double r0 = pgeig::rayleigh(p, x).rho;
    rq_err = std::max(rq_err, std::abs(pgeig::rayleigh(form.pencil(), y).rho - r0) / r0);
  }
  const bool ok = eig_err <= 1e-10 && trip_err <= 1e-10 && rq_err <= 1e-10;
  return {ok, fmt("relative errors: eigenvalues %.2e, round trip %.2e, Rayleigh quotient %.2e", eig_err, trip_err,
                  rq_err)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"bound validity, preconditioned steepest descent", criterion1},
      {"bound validity, fixed-step preconditioned inverse iteration", criterion2},
      {"sharpness of the steepest descent estimate", criterion3},
      {"steepest descent dominates the fixed-step iteration", criterion4},
      {"closed-form worst direction matches brute force", criterion5},
      {"segment minimum at an endpoint", criterion6},
      {"algebraic identities", criterion7},
      {"exact-inverse limit factor", criterion8},
      {"scale and reflection invariances", criterion9},
      {"worst case concentrates on three coordinates", criterion10},
      {"diagonalizing transform", criterion11},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
