// Preconditioned steepest descent on a finite-difference Laplacian with a
// synthetic preconditioner of quality 0.5; prints rho and the certified ratio per step.
#include <cstdio>

#include "pgeig/pgeig.hpp"

int main() {
  const pgeig::SymmetricPencil pencil = pgeig::laplacian1d(32, pgeig::MassKind::fem);
  const pgeig::DiagonalForm form = pgeig::diagonalize(pencil);
  const pgeig::Preconditioner t = pgeig::synthetic_gamma_preconditioner(form, 0.5, 42);

  pgeig::RunOptions options;
  options.stop.delta_tol = 1e-12;
  options.certify_gamma = 0.5;
  const pgeig::RunResult run =
      pgeig::run(pencil, t, pgeig::Vector::Ones(pencil.size()), pgeig::SolverKind::psd, options);

  std::printf("%4s  %-22s  %-12s  %-12s  %s\n", "step", "rho", "ratio", "sigma^2", "verdict");
  for (const pgeig::IterationRecord& rec : run.records) {
    if (!rec.bound) {
      std::printf("%4d  %-22.15g\n", rec.step_index, rec.rho.rho);
      continue;
    }
    std::printf("%4d  %-22.15g  %-12.4e  %-12.4e  %s\n", rec.step_index, rec.rho.rho, rec.bound->ratio,
                rec.bound->sigma_squared, pgeig::to_string(rec.bound->verdict));
  }
  std::printf("lambda_1 = %.15g, status %s\n", run.spectrum.lambda(0), pgeig::to_string(run.status));
  return 0;
}
