#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pgeig {

/// The gradient-type eigensolvers: fixed step or Rayleigh-Ritz line search,
/// with a general preconditioner or the exact inverse of A.
enum class SolverKind {
  invit1,   // x - A^{-1}(Ax - rho Bx)
  pinvit1,  // x - T(Ax - rho Bx)
  invit2,   // steepest descent, i.e. psd with T = A^{-1}
  psd,      // Rayleigh-Ritz on span{x, T(Ax - rho Bx)}
};

inline std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::invit1: return "invit1";
    case SolverKind::pinvit1: return "pinvit1";
    case SolverKind::invit2: return "invit2";
    case SolverKind::psd: return "psd";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver_kind(std::string_view name) {
  if (name == "invit1") return SolverKind::invit1;
  if (name == "pinvit1") return SolverKind::pinvit1;
  if (name == "invit2") return SolverKind::invit2;
  if (name == "psd" || name == "pinvit2") return SolverKind::psd;
  return std::nullopt;
}

inline bool uses_exact_inverse(SolverKind kind) {
  return kind == SolverKind::invit1 || kind == SolverKind::invit2;
}

inline bool uses_ritz_step(SolverKind kind) {
  return kind == SolverKind::invit2 || kind == SolverKind::psd;
}

}  // namespace pgeig
