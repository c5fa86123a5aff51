#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace ppsolve {

enum class Termination { tol_reached, max_iters, stagnation };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::tol_reached: return "tol_reached";
    case Termination::max_iters: return "max_iters";
    case Termination::stagnation: return "stagnation";
  }
  return "stagnation";
}

/// Outcome of any iterative solve. residual_history[0] is the initial
/// relative residual, so its length is iterations + 1 when recorded.
struct IterationReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  bool converged = false;
  Termination termination = Termination::max_iters;
  double wall_time = 0.0;
  double final_relative_residual = 0.0;

  /// Inner work performed inside preconditioners or half-steps.
  std::size_t inner_iterations = 0;
  std::size_t inner_solves = 0;

  /// Largest relative gap between the true residual and the Krylov
  /// recurrence residual observed at restart boundaries.
  double restart_residual_gap = 0.0;
};

}  // namespace ppsolve
