// Experiment orchestration behind the pgeig command-line tool: configuration,
// solve / certify / sharpness / concentration runs and CSV or JSON reports.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pgeig/bounds.hpp"
#include "pgeig/concentration.hpp"
#include "pgeig/conelab.hpp"
#include "pgeig/errors.hpp"
#include "pgeig/iterate.hpp"
#include "pgeig/pencil.hpp"
#include "pgeig/precond.hpp"
#include "pgeig/problems.hpp"
#include "pgeig/solver_kind.hpp"

namespace pgeig::experiment {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitMaxSteps = 2;
inline constexpr int kExitViolation = 3;

/// Bad flag value or config entry.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string command = "solve";  // solve | certify | sharpness | concentration

  // problem: diagonal:l1,l2,... | laplacian1d:n[:fem] | laplacian2d:nxXny[:fem] | mtx:A.mtx[,B.mtx] | random:n
  std::string problem;
  SolverKind solver = SolverKind::psd;
  std::vector<SolverKind> solvers = {SolverKind::psd, SolverKind::pinvit1};

  // preconditioner: identity | exact | jacobi | synthetic; empty picks a default
  std::string precond;
  std::optional<double> gamma;
  std::vector<double> gammas = {0.0, 0.3, 0.6, 0.9};
  std::optional<std::uint64_t> seed;
  double precond_scale = 1.0;
  bool rescale = false;

  int max_steps = 500;
  double residual_tol = 1e-10;
  double delta_tol = 1e-10;
  int trials = 1;

  std::vector<double> mus;
  std::vector<double> deltas = {1e-2, 1e-4, 1e-6, 1e-8};
  std::string t_mode = "t1";  // t1 | grid
  std::optional<double> mu0;
  int restarts = 200;

  std::string output;          // empty writes to stdout
  std::string format = "csv";  // csv | json
};

// ---------------------------------------------------------------------------
// key=value serialization

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> values;
  for (const std::string& part : split(text, ','))
    if (!part.empty()) values.push_back(parse_double(key, part));
  if (values.empty()) throw ConfigError(key + ": empty list");
  return values;
}

inline std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + format_double(values[i]);
  return out;
}

inline SolverKind solver_of(const std::string& key, const std::string& text) {
  const std::optional<SolverKind> kind = parse_solver_kind(text);
  if (!kind) throw ConfigError(key + ": unknown solver '" + text + "'");
  return *kind;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

}  // namespace detail

/// Applies one key=value setting. Unknown keys and malformed values throw ConfigError.
inline void set_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "command") {
    if (v != "solve" && v != "certify" && v != "sharpness" && v != "concentration")
      throw ConfigError("command: unknown command '" + v + "'");
    c.command = v;
  } else if (key == "problem") {
    c.problem = v;
  } else if (key == "solver") {
    c.solver = solver_of(key, v);
  } else if (key == "solvers") {
    c.solvers.clear();
    for (const std::string& part : split(v, ','))
      if (!part.empty()) c.solvers.push_back(solver_of(key, part));
    if (c.solvers.empty()) throw ConfigError("solvers: empty list");
  } else if (key == "precond") {
    if (v != "" && v != "identity" && v != "exact" && v != "jacobi" && v != "synthetic")
      throw ConfigError("precond: unknown kind '" + v + "'");
    c.precond = v;
  } else if (key == "gamma") {
    if (v.empty()) c.gamma.reset();
    else c.gamma = parse_double(key, v);
  } else if (key == "gammas") {
    c.gammas = parse_list(key, v);
  } else if (key == "seed") {
    if (v.empty()) {
      c.seed.reset();
    } else {
      const long long s = parse_integer(key, v);
      if (s < 0) throw ConfigError("seed: must be nonnegative");
      c.seed = static_cast<std::uint64_t>(s);
    }
  } else if (key == "precond_scale") {
    c.precond_scale = parse_double(key, v);
  } else if (key == "rescale") {
    c.rescale = parse_bool(key, v);
  } else if (key == "max_steps") {
    c.max_steps = static_cast<int>(parse_integer(key, v));
  } else if (key == "residual_tol") {
    c.residual_tol = parse_double(key, v);
  } else if (key == "delta_tol") {
    c.delta_tol = parse_double(key, v);
  } else if (key == "trials") {
    c.trials = static_cast<int>(parse_integer(key, v));
  } else if (key == "mus") {
    c.mus = parse_list(key, v);
  } else if (key == "deltas") {
    c.deltas = parse_list(key, v);
  } else if (key == "t_mode") {
    if (v != "t1" && v != "grid") throw ConfigError("t_mode: expected t1 or grid, got '" + v + "'");
    c.t_mode = v;
  } else if (key == "mu0") {
    if (v.empty()) c.mu0.reset();
    else c.mu0 = parse_double(key, v);
  } else if (key == "restarts") {
    c.restarts = static_cast<int>(parse_integer(key, v));
  } else if (key == "output") {
    c.output = v;
  } else if (key == "format") {
    if (v != "csv" && v != "json") throw ConfigError("format: expected csv or json, got '" + v + "'");
    c.format = v;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

/// All settings as ordered key/value pairs; optional values that are unset are omitted.
inline std::vector<std::pair<std::string, std::string>> to_pairs(const ExperimentConfig& c) {
  using detail::format_double;
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", c.command);
  kv.emplace_back("problem", c.problem);
  kv.emplace_back("solver", std::string(to_string(c.solver)));
  std::string solvers;
  for (std::size_t i = 0; i < c.solvers.size(); ++i) solvers += (i ? "," : "") + std::string(to_string(c.solvers[i]));
  kv.emplace_back("solvers", solvers);
  kv.emplace_back("precond", c.precond);
  if (c.gamma) kv.emplace_back("gamma", format_double(*c.gamma));
  kv.emplace_back("gammas", detail::join(c.gammas));
  if (c.seed) kv.emplace_back("seed", std::to_string(*c.seed));
  kv.emplace_back("precond_scale", format_double(c.precond_scale));
  kv.emplace_back("rescale", c.rescale ? "true" : "false");
  kv.emplace_back("max_steps", std::to_string(c.max_steps));
  kv.emplace_back("residual_tol", format_double(c.residual_tol));
  kv.emplace_back("delta_tol", format_double(c.delta_tol));
  kv.emplace_back("trials", std::to_string(c.trials));
  if (!c.mus.empty()) kv.emplace_back("mus", detail::join(c.mus));
  kv.emplace_back("deltas", detail::join(c.deltas));
  kv.emplace_back("t_mode", c.t_mode);
  if (c.mu0) kv.emplace_back("mu0", format_double(*c.mu0));
  kv.emplace_back("restarts", std::to_string(c.restarts));
  kv.emplace_back("output", c.output);
  kv.emplace_back("format", c.format);
  return kv;
}

inline std::string to_config_string(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [k, v] : to_pairs(c)) out += k + "=" + v + "\n";
  return out;
}

/// Parses key=value lines; '#' starts a comment. Errors carry the 1-based line number.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected key=value");
    try {
      set_value(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ParseError(number, e.what());
    }
  }
  return base;
}

inline ExperimentConfig parse_config_string(const std::string& text, ExperimentConfig base = {}) {
  std::istringstream in(text);
  return parse_config(in, std::move(base));
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

// ---------------------------------------------------------------------------
// Report

struct Record {
  int trial = 0;
  std::string solver;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  int step = 0;
  double rho = 0.0;
  double mu = 0.0;
  double residual_norm = 0.0;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double sigma_sq = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;  // start | unchecked | holds | passed_lambda_i | violated
};

struct FactorEntry {
  std::string label;
  Eigen::Index interval_index = 0;
  double gamma = 0.0;
  BoundFactors factors;
};

struct SharpnessRow {
  double delta = 0.0;
  double t = 0.0;
  double measured_ratio = 0.0;
  double sigma_sq = 0.0;
  double gap = 0.0;           // sigma_sq - measured_ratio
  double relative_gap = 0.0;  // gap / sigma_sq
};

struct Summary {
  int runs = 0;
  int steps = 0;
  double final_rho = std::numeric_limits<double>::quiet_NaN();
  std::string status;
  double max_ratio_over_sigma_sq = std::numeric_limits<double>::quiet_NaN();
  int holds = 0;
  int passed_lambda_i = 0;
  int violated = 0;
  int unchecked = 0;
  int skipped = 0;  // certify trials whose preconditioner does not meet the declared gamma
  int exit_code = kExitOk;
  std::vector<std::string> notes;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<Record> records;
  std::vector<FactorEntry> bound_factors;
  std::vector<SharpnessRow> sharpness;
  std::optional<cone::ConcentrationReport> concentration;
  Summary summary;
};

namespace detail {

inline void tally(Summary& s, const Record& r) {
  if (r.verdict == "holds") ++s.holds;
  else if (r.verdict == "passed_lambda_i") ++s.passed_lambda_i;
  else if (r.verdict == "violated") ++s.violated;
  else if (r.verdict == "unchecked") ++s.unchecked;
  if (std::isfinite(r.ratio) && std::isfinite(r.sigma_sq) && r.sigma_sq > 0.0) {
    const double q = r.ratio / r.sigma_sq;
    if (!(s.max_ratio_over_sigma_sq >= q)) s.max_ratio_over_sigma_sq = q;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Problem and preconditioner construction

/// Builds the pencil named by `spec`. random:n draws log-uniform eigenvalues in [1, 1e3] from `rng`.
inline SymmetricPencil build_problem(const std::string& spec, std::mt19937_64* rng = nullptr) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("problem: expected kind:parameters, got '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  const std::vector<std::string> parts = detail::split(spec.substr(colon + 1), ':');
  if (parts.empty() || parts[0].empty()) throw ConfigError("problem: missing parameters in '" + spec + "'");
  auto mass_of = [&](std::size_t index) {
    if (parts.size() <= index) return MassKind::identity;
    if (parts[index] == "fem") return MassKind::fem;
    if (parts[index] == "identity") return MassKind::identity;
    throw ConfigError("problem: unknown mass kind '" + parts[index] + "'");
  };
  auto positive = [&](const std::string& text) {
    const long long v = detail::parse_integer("problem", text);
    if (v < 1) throw ConfigError("problem: sizes must be positive");
    return static_cast<int>(v);
  };
  if (kind == "diagonal") {
    const std::vector<double> lambdas = detail::parse_list("problem", parts[0]);
    return diagonal_problem(lambdas);
  }
  if (kind == "laplacian1d") return laplacian1d(positive(parts[0]), mass_of(1));
  if (kind == "laplacian2d") {
    const auto x = parts[0].find('x');
    if (x == std::string::npos) throw ConfigError("problem: laplacian2d expects NXxNY");
    return laplacian2d(positive(parts[0].substr(0, x)), positive(parts[0].substr(x + 1)), mass_of(1));
  }
  if (kind == "mtx") {
    const std::vector<std::string> files = detail::split(parts[0], ',');
    const Matrix a = read_matrix_market(files[0]);
    const Matrix b = files.size() > 1 ? read_matrix_market(files[1]) : Matrix::Identity(a.rows(), a.cols());
    return SymmetricPencil(a, b);
  }
  if (kind == "random") {
    if (!rng) throw ConfigError("problem: random problems need --seed");
    const int n = positive(parts[0]);
    std::uniform_real_distribution<double> exponent(0.0, 3.0);
    std::vector<double> lambdas(static_cast<std::size_t>(n));
    for (double& l : lambdas) l = std::pow(10.0, exponent(*rng));
    return diagonal_problem(lambdas);
  }
  throw ConfigError("problem: unknown kind '" + kind + "'");
}

inline bool is_known_spectrum_kind(const std::string& spec) {
  return spec.rfind("mtx:", 0) != 0;
}

inline std::string effective_precond(const ExperimentConfig& c, SolverKind kind) {
  if (!c.precond.empty()) return c.precond;
  if (uses_exact_inverse(kind)) return "exact";
  return c.gamma ? "synthetic" : "jacobi";
}

/// The preconditioner selected by the config, after optional scaling and rescaling.
inline Preconditioner build_preconditioner(const ExperimentConfig& c, SolverKind kind,
                                           const SymmetricPencil& pencil, const DiagonalForm& form,
                                           std::optional<double> gamma, std::uint64_t synthetic_seed) {
  const std::string which = effective_precond(c, kind);
  std::optional<Preconditioner> t;
  if (which == "identity") {
    const Preconditioner id(Matrix::Identity(pencil.size(), pencil.size()));
    t.emplace(id.matrix(), estimate_quality(pencil, id));
  } else if (which == "exact") {
    t.emplace(exact_inverse_preconditioner(form));
  } else if (which == "jacobi") {
    t.emplace(jacobi_preconditioner(pencil));
  } else {
    if (!gamma) throw ConfigError("synthetic preconditioner needs --gamma");
    t.emplace(synthetic_gamma_preconditioner(form, *gamma, synthetic_seed));
  }
  if (c.precond_scale != 1.0) t.emplace(t->scaled(c.precond_scale));
  if (c.rescale) t.emplace(rescale(*t));
  return *t;
}

/// Gamma against which `kind` is certified for preconditioner t, if the
/// estimate applies: the rescaled gamma for PSD (scale invariant), the
/// unscaled spectral radius of I - TA for PINVIT(1), 0 for the exact-inverse kinds.
inline std::optional<double> certification_gamma(SolverKind kind, const Preconditioner& t) {
  if (uses_exact_inverse(kind)) return 0.0;
  const PrecondQuality& q = t.quality();
  std::optional<double> g = kind == SolverKind::psd ? q.gamma : q.admissible_gamma();
  if (g && *g < 1.0) return std::max(*g, 0.0);
  return std::nullopt;
}

inline Vector start_vector(Eigen::Index n, std::mt19937_64* rng) {
  if (!rng) return Vector::Ones(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = normal(*rng);
  return x;
}

namespace detail {

inline StopCriteria stop_of(const ExperimentConfig& c) {
  if (c.max_steps < 0) throw ConfigError("max_steps: must be nonnegative");
  return {c.max_steps, c.residual_tol, c.delta_tol};
}

inline void append_run(ExperimentReport& report, const RunResult& run, int trial, SolverKind kind,
                       double gamma_label) {
  for (const IterationRecord& rec : run.records) {
    Record r;
    r.trial = trial;
    r.solver = std::string(to_string(kind));
    r.gamma = gamma_label;
    r.step = rec.step_index;
    r.rho = rec.rho.rho;
    r.mu = rec.rho.mu;
    r.residual_norm = rec.residual_norm;
    r.delta = rec.delta;
    if (rec.step_index == 0) {
      r.verdict = "start";
    } else if (!rec.bound) {
      r.verdict = "unchecked";
    } else {
      r.ratio = rec.bound->ratio;
      r.sigma_sq = rec.bound->sigma_squared;
      r.verdict = to_string(rec.bound->verdict);
    }
    tally(report.summary, r);
    report.records.push_back(std::move(r));
  }
  report.summary.runs += 1;
  report.summary.steps += static_cast<int>(run.records.size()) - 1;
  report.summary.final_rho = run.records.back().rho.rho;
}

inline FactorEntry factor_entry(const std::string& label, const Spectrum& s, Eigen::Index i, double gamma) {
  FactorEntry f;
  f.label = label;
  f.interval_index = i;
  f.gamma = gamma;
  if (i + 1 < s.size()) f.factors = pgeig::detail::factors_from_kappa(s, i, pgeig::detail::kappa_unchecked(s, i), gamma);
  else f.factors.interval_index = i;
  return f;
}

inline void finish_exit_code(Summary& s) {
  if (s.violated > 0) s.exit_code = kExitViolation;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline ExperimentReport cmd_solve(const ExperimentConfig& c) {
  ExperimentReport report;
  report.config = c;
  if (c.problem.empty()) throw ConfigError("solve: --problem is required");
  std::optional<std::mt19937_64> rng;
  if (c.seed) rng.emplace(*c.seed);
  const SymmetricPencil pencil = build_problem(c.problem, rng ? &*rng : nullptr);
  const DiagonalForm form = diagonalize(pencil);
  const std::string which = effective_precond(c, c.solver);
  if (which == "synthetic" && !c.seed) throw ConfigError("solve: synthetic preconditioners need --seed");
  const std::uint64_t t_seed = rng ? (*rng)() : 0;
  const Preconditioner t = build_preconditioner(c, c.solver, pencil, form, c.gamma, t_seed);
  const Vector x0 = start_vector(pencil.size(), rng ? &*rng : nullptr);

  RunOptions options;
  options.stop = detail::stop_of(c);
  options.certify_gamma = certification_gamma(c.solver, t);
  if (!options.certify_gamma)
    report.summary.notes.push_back("no admissible gamma < 1 for this preconditioner; steps left uncertified");
  const RunResult run = pgeig::run(pencil, t, x0, c.solver, options);

  const double label = options.certify_gamma.value_or(std::numeric_limits<double>::quiet_NaN());
  detail::append_run(report, run, 0, c.solver, label);
  report.bound_factors.push_back(
      detail::factor_entry("start", run.spectrum, run.records.front().interval_index, options.certify_gamma.value_or(0.0)));
  report.summary.status = to_string(run.status);
  if (!run.monotone) report.summary.notes.push_back("Rayleigh quotient increased during the run");
  if (run.status == RunStatus::max_steps) report.summary.exit_code = kExitMaxSteps;
  detail::finish_exit_code(report.summary);
  return report;
}

inline ExperimentReport cmd_certify(const ExperimentConfig& c) {
  ExperimentReport report;
  report.config = c;
  if (c.problem.empty()) throw ConfigError("certify: --problem is required");
  if (!is_known_spectrum_kind(c.problem))
    throw ConfigError("certify: only problems with a known spectrum are supported (not mtx)");
  if (!c.seed) throw ConfigError("certify: --seed is required");
  if (c.trials < 1) throw ConfigError("certify: trials must be positive");
  for (double g : c.gammas)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("certify: every gamma must lie in [0,1)");

  RunOptions options;
  options.stop = detail::stop_of(c);
  for (int trial = 0; trial < c.trials; ++trial) {
    std::mt19937_64 rng(*c.seed + static_cast<std::uint64_t>(trial));
    const SymmetricPencil pencil = build_problem(c.problem, &rng);
    const DiagonalForm form = diagonalize(pencil);
    const Vector x0 = start_vector(pencil.size(), &rng);
    for (double g : c.gammas) {
      const std::uint64_t t_seed = rng();
      for (SolverKind kind : c.solvers) {
        ExperimentConfig trial_config = c;
        if (trial_config.precond.empty() && !uses_exact_inverse(kind)) trial_config.precond = "synthetic";
        const Preconditioner t = build_preconditioner(trial_config, kind, pencil, form, g, t_seed);
        if (!uses_exact_inverse(kind)) {
          // guard: the declared gamma must bound |I - TA| for the preconditioner in use
          const double measured = *estimate_quality(pencil, t).admissible_gamma();
          if (measured > g + 1e-10 || measured >= 1.0) {
            ++report.summary.skipped;
            report.summary.notes.push_back("trial " + std::to_string(trial) + " " + std::string(to_string(kind)) +
                                           std::string(" gamma ") + detail::format_double(g) +
                                           ": quality_mismatch, measured |I - TA| = " +
                                           detail::format_double(measured) + "; certification skipped");
            continue;
          }
        }
        options.certify_gamma = g;
        const RunResult run = pgeig::run(pencil, t, x0, kind, options);
        detail::append_run(report, run, trial, kind, uses_exact_inverse(kind) ? 0.0 : g);
        if (trial == 0)
          report.bound_factors.push_back(detail::factor_entry(
              std::string(to_string(kind)) + " gamma=" + detail::format_double(g), run.spectrum,
              run.records.front().interval_index, uses_exact_inverse(kind) ? 0.0 : g));
      }
    }
  }
  report.summary.status = report.summary.violated ? "violations" : "ok";
  detail::finish_exit_code(report.summary);
  return report;
}

inline ExperimentReport cmd_sharpness(const ExperimentConfig& c) {
  ExperimentReport report;
  report.config = c;
  if (c.mus.size() != 3) throw ConfigError("sharpness: --mus needs exactly three values");
  const cone::Vec3 mus(c.mus[0], c.mus[1], c.mus[2]);
  if (!(mus(0) > mus(1) && mus(1) > mus(2) && mus(2) > 0.0))
    throw ConfigError("sharpness: mus must be positive and strictly decreasing");
  const double gamma = c.gamma.value_or(0.5);
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("sharpness: gamma must lie in [0,1)");
  const double kappa = (mus(1) - mus(2)) / (mus(0) - mus(2));
  const double sig = sigma_psd(kappa, gamma);  // kappa / (2 - kappa) for gamma = 0
  const double t1 = cone::t1(kappa, gamma);
  std::vector<double> ts = {t1};
  if (c.t_mode == "grid") {
    ts.clear();
    for (int k = 1; k <= 20; ++k) ts.push_back(t1 * k / 10.0);
  }
  for (double d : c.deltas) {
    if (!(d > 0.0)) throw ConfigError("sharpness: every Delta must be positive");
    for (double t : ts) {
      const cone::WorstCaseResult w = cone::worst_case_instance(cone::make_setup(mus, gamma, d, t));
      SharpnessRow row{d, t, w.measured_ratio, sig * sig, 0.0, 0.0};
      row.gap = row.sigma_sq - row.measured_ratio;
      row.relative_gap = row.gap / row.sigma_sq;
      if (row.measured_ratio > row.sigma_sq * (1.0 + kBoundTolerance)) ++report.summary.violated;
      else ++report.summary.holds;
      report.sharpness.push_back(row);
    }
  }
  BoundFactors f;
  f.interval_index = 0;
  f.kappa = kappa;
  f.sigma_invit2 = sigma_psd(kappa, 0.0);
  f.sigma_psd = sig;
  report.bound_factors.push_back({"mu-triple", 0, gamma, f});
  report.summary.runs = static_cast<int>(report.sharpness.size());
  if (gamma == 0.0) report.summary.notes.push_back("gamma = 0: factor kappa / (2 - kappa) of the exact-inverse limit");
  report.summary.status = report.summary.violated ? "violations" : "ok";
  detail::finish_exit_code(report.summary);
  return report;
}

inline ExperimentReport cmd_concentration(const ExperimentConfig& c) {
  ExperimentReport report;
  report.config = c;
  if (!c.seed) throw ConfigError("concentration: --seed is required");
  if (c.mus.size() < 3 || c.mus.size() > 5) throw ConfigError("concentration: --mus needs 3 to 5 values");
  if (!c.mu0) throw ConfigError("concentration: --mu0 is required");
  const Spectrum s = Spectrum::from_mus(Eigen::Map<const Vector>(c.mus.data(), static_cast<Eigen::Index>(c.mus.size())));
  report.concentration = cone::three_d_concentration_check(s, c.gamma.value_or(0.5), *c.mu0, c.restarts, *c.seed);
  report.summary.runs = c.restarts;
  report.summary.status = report.concentration->within_bound() ? "ok" : "beats_bound";
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  if (c.command == "solve") return cmd_solve(c);
  if (c.command == "certify") return cmd_certify(c);
  if (c.command == "sharpness") return cmd_sharpness(c);
  if (c.command == "concentration") return cmd_concentration(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return format_double(v);
}

inline nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ExperimentReport& report) {
  using detail::csv_number;
  if (report.concentration) {
    const cone::ConcentrationReport& r = *report.concentration;
    out << "key,value\n";
    out << "n," << r.n << "\nmu0," << csv_number(r.mu0) << "\ngamma," << csv_number(r.gamma)
        << "\ninterval_index," << r.interval_index << "\nrestarts," << r.restarts << "\nbest_value,"
        << csv_number(r.best_value) << "\nbound_value," << csv_number(r.bound_value) << "\nexcess,"
        << csv_number(r.excess) << "\nsignificant_components," << r.significant_components << "\n";
    out << "best_x,";
    for (Eigen::Index k = 0; k < r.best_x.size(); ++k) out << (k ? ";" : "") << csv_number(r.best_x(k));
    out << "\n";
    return;
  }
  if (report.config.command == "sharpness") {
    out << "delta,t,measured_ratio,sigma_sq,gap,relative_gap\n";
    for (const SharpnessRow& r : report.sharpness)
      out << csv_number(r.delta) << ',' << csv_number(r.t) << ',' << csv_number(r.measured_ratio) << ','
          << csv_number(r.sigma_sq) << ',' << csv_number(r.gap) << ',' << csv_number(r.relative_gap) << '\n';
    return;
  }
  const bool sweep = report.config.command == "certify";
  if (sweep) out << "trial,solver,gamma,";
  out << "step,rho,mu,residual_norm,delta,ratio,sigma_sq,verdict\n";
  for (const Record& r : report.records) {
    if (sweep) out << r.trial << ',' << r.solver << ',' << csv_number(r.gamma) << ',';
    out << r.step << ',' << csv_number(r.rho) << ',' << csv_number(r.mu) << ',' << csv_number(r.residual_norm)
        << ',' << csv_number(r.delta) << ',' << csv_number(r.ratio) << ',' << csv_number(r.sigma_sq) << ','
        << r.verdict << '\n';
  }
}

inline nlohmann::json to_json(const ExperimentReport& report) {
  using detail::json_number;
  nlohmann::json j;
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : to_pairs(report.config)) config[k] = v;
  j["config"] = config;

  nlohmann::json records = nlohmann::json::array();
  for (const Record& r : report.records) {
    nlohmann::json e;
    if (report.config.command == "certify") {
      e["trial"] = r.trial;
      e["solver"] = r.solver;
      e["gamma"] = json_number(r.gamma);
    }
    e["step"] = r.step;
    e["rho"] = json_number(r.rho);
    e["mu"] = json_number(r.mu);
    e["residual_norm"] = json_number(r.residual_norm);
    e["delta"] = json_number(r.delta);
    e["ratio"] = json_number(r.ratio);
    e["sigma_sq"] = json_number(r.sigma_sq);
    e["verdict"] = r.verdict;
    records.push_back(std::move(e));
  }
  j["records"] = std::move(records);

  nlohmann::json factors = nlohmann::json::array();
  for (const FactorEntry& f : report.bound_factors)
    factors.push_back({{"label", f.label},
                       {"interval_index", f.interval_index},
                       {"gamma", json_number(f.gamma)},
                       {"kappa", json_number(f.factors.kappa)},
                       {"sigma_invit1", json_number(f.factors.sigma_invit1)},
                       {"sigma_pinvit1", json_number(f.factors.sigma_pinvit1)},
                       {"sigma_invit2", json_number(f.factors.sigma_invit2)},
                       {"sigma_psd", json_number(f.factors.sigma_psd)}});
  j["bound_factors"] = std::move(factors);

  if (!report.sharpness.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const SharpnessRow& r : report.sharpness)
      rows.push_back({{"delta", json_number(r.delta)},
                      {"t", json_number(r.t)},
                      {"measured_ratio", json_number(r.measured_ratio)},
                      {"sigma_sq", json_number(r.sigma_sq)},
                      {"gap", json_number(r.gap)},
                      {"relative_gap", json_number(r.relative_gap)}});
    j["sharpness"] = std::move(rows);
  }
  if (report.concentration) {
    const cone::ConcentrationReport& r = *report.concentration;
    std::vector<double> x(r.best_x.data(), r.best_x.data() + r.best_x.size());
    j["concentration"] = {{"n", r.n},
                          {"mu0", r.mu0},
                          {"gamma", r.gamma},
                          {"interval_index", r.interval_index},
                          {"restarts", r.restarts},
                          {"best_value", json_number(r.best_value)},
                          {"bound_value", json_number(r.bound_value)},
                          {"excess", json_number(r.excess)},
                          {"significant_components", r.significant_components},
                          {"best_x", x}};
  }

  const Summary& s = report.summary;
  j["summary"] = {{"runs", s.runs},
                  {"steps", s.steps},
                  {"final_rho", json_number(s.final_rho)},
                  {"status", s.status},
                  {"max_ratio_over_sigma_sq", json_number(s.max_ratio_over_sigma_sq)},
                  {"holds", s.holds},
                  {"passed_lambda_i", s.passed_lambda_i},
                  {"violated", s.violated},
                  {"unchecked", s.unchecked},
                  {"skipped", s.skipped},
                  {"exit_code", s.exit_code},
                  {"notes", s.notes}};
  return j;
}

inline void write_report(std::ostream& out, const ExperimentReport& report) {
  if (report.config.format == "json") out << to_json(report).dump(2) << '\n';
  else write_csv(out, report);
}

/// Writes the report to its configured destination, prints notes and returns the summary's exit code.
inline int emit(const ExperimentReport& report, std::ostream& out, std::ostream& err) {
  const std::string& path = report.config.output;
  if (path.empty()) {
    write_report(out, report);
  } else {
    std::ofstream file(path);
    if (!file) throw ConfigError("cannot open output file '" + path + "'");
    write_report(file, report);
    if (!file) throw ConfigError("failed writing output file '" + path + "'");
  }
  const Summary& s = report.summary;
  for (const std::string& note : s.notes) err << "note: " << note << '\n';
  if (s.violated) err << "certification: " << s.violated << " violated step(s)\n";
  return s.exit_code;
}

/// Runs the configured command, writes the report and returns the process exit code.
/// Diagnostics go to `err`; input and parse failures yield exit code 1.
inline int execute(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  try {
    return emit(run_experiment(c), out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ConstructionError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const NumericFailure& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitInputError;
}

}  // namespace pgeig::experiment
