// pgeig: solve, certify and sharpness experiments for preconditioned gradient eigensolvers.
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "pgeig/experiment.hpp"

namespace {

namespace ex = pgeig::experiment;

struct Flag {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

class FlagSet {
 public:
  void add(CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    flags_.push_back({key, "", nullptr});
    owners_.push_back(sub);
    names_.push_back(name);
    helps_.push_back(help);
  }

  // Options are bound after all flags are registered so the storage does not move.
  void bind() {
    for (std::size_t i = 0; i < flags_.size(); ++i)
      flags_[i].option = owners_[i]->add_option(names_[i], flags_[i].value, helps_[i]);
  }

  void apply(CLI::App* sub, ex::ExperimentConfig& config) const {
    for (std::size_t i = 0; i < flags_.size(); ++i)
      if (owners_[i] == sub && flags_[i].option->count() > 0) ex::set_value(config, flags_[i].key, flags_[i].value);
  }

 private:
  std::vector<Flag> flags_;
  std::vector<CLI::App*> owners_;
  std::vector<std::string> names_;
  std::vector<std::string> helps_;
};

void add_common(FlagSet& flags, CLI::App* sub) {
  flags.add(sub, "--seed", "seed", "RNG seed (required for randomized runs)");
  flags.add(sub, "--output,-o", "output", "Output file (default: stdout)");
  flags.add(sub, "--format", "format", "csv or json");
}

void add_run_flags(FlagSet& flags, CLI::App* sub) {
  flags.add(sub, "--problem", "problem",
            "diagonal:l1,l2,... | laplacian1d:N[:fem] | laplacian2d:NXxNY[:fem] | mtx:A.mtx[,B.mtx] | random:N");
  flags.add(sub, "--precond", "precond", "identity | exact | jacobi | synthetic");
  flags.add(sub, "--precond-scale", "precond_scale", "Multiply the preconditioner by this factor");
  flags.add(sub, "--rescale", "rescale", "Apply the optimal scaling 2/(gamma1+gamma2) (true/false)");
  flags.add(sub, "--max-steps", "max_steps", "Iteration limit per run");
  flags.add(sub, "--residual-tol", "residual_tol", "Stop when |Ax - rho Bx| / |Ax| falls below");
  flags.add(sub, "--delta-tol", "delta_tol", "Stop when Delta falls below (0 disables)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned gradient eigensolver experiments"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file; flags override its entries");

  FlagSet flags;
  CLI::App* solve = app.add_subcommand("solve", "Run one solver and certify every step");
  add_run_flags(flags, solve);
  flags.add(solve, "--solver", "solver", "invit1 | pinvit1 | invit2 | psd");
  flags.add(solve, "--gamma", "gamma", "Quality of the synthetic preconditioner");
  add_common(flags, solve);

  CLI::App* certify = app.add_subcommand("certify", "Seeded certification sweep over solvers and gammas");
  add_run_flags(flags, certify);
  flags.add(certify, "--solvers", "solvers", "Comma-separated solver kinds");
  flags.add(certify, "--gammas", "gammas", "Comma-separated gamma grid");
  flags.add(certify, "--trials", "trials", "Number of trials");
  add_common(flags, certify);

  CLI::App* sharpness = app.add_subcommand("sharpness", "Worst-case ratios approaching sigma^2");
  flags.add(sharpness, "--mus", "mus", "Three decreasing reciprocal eigenvalues");
  flags.add(sharpness, "--gamma", "gamma", "Preconditioner quality in [0,1)");
  flags.add(sharpness, "--deltas", "deltas", "Comma-separated Delta levels");
  flags.add(sharpness, "--t-mode", "t_mode", "t1 or grid");
  add_common(flags, sharpness);

  CLI::App* concentration = app.add_subcommand("concentration", "Search for the worst case in 3 to 5 dimensions");
  flags.add(concentration, "--mus", "mus", "Decreasing reciprocal eigenvalues (3 to 5)");
  flags.add(concentration, "--gamma", "gamma", "Preconditioner quality in [0,1)");
  flags.add(concentration, "--mu0", "mu0", "Level of the Rayleigh quotient (mu form)");
  flags.add(concentration, "--restarts", "restarts", "Number of random restarts");
  add_common(flags, concentration);

  flags.bind();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ex::kExitInputError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  ex::ExperimentConfig config;
  try {
    if (!config_path.empty()) config = ex::load_config(config_path);
    config.command = chosen->get_name();
    flags.apply(chosen, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ex::kExitInputError;
  }
  return ex::execute(config, std::cout, std::cerr);
}
