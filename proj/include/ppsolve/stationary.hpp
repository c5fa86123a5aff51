#pragma once

#include <optional>

#include "ppsolve/inner_solver.hpp"
#include "ppsolve/shift.hpp"
#include "ppsolve/splitting.hpp"

namespace ppsolve {

/// Direct factorization up to n = 512, otherwise strict Krylov solves with
/// a 1e10 residual reduction.
InnerSolveConfig default_stationary_inner(std::size_t n);

struct StationaryConfig {
  std::size_t max_iters = 1000;
  double rel_residual_tol = 1e-7;
  /// Damping in (0, 1]; 1 is the plain two-half-step iteration.
  double beta = 1.0;
  std::optional<InnerSolveConfig> inner;
  /// Stop with Termination::stagnation once the residual exceeds this
  /// multiple of the initial one.
  double divergence_factor = 1e6;
  bool record_history = true;
};

template <Scalar T>
struct StationaryResult {
  Vector<T> u;
  IterationReport report;
};

/// The two-half-step iteration
///   (Sigma + P2) u_half = (Sigma - P1) u + b
///   (Sigma + P1) u_next = (Sigma - P2) u_half + b
/// with both shifted systems prepared once.
template <Scalar T>
class PpsIteration {
 public:
  PpsIteration(PPSplitting<T> sp, ShiftMatrix<T> sigma, std::optional<InnerSolveConfig> inner = std::nullopt);

  Vector<T> step(std::span<const T> u, std::span<const T> b) const;
  StationaryResult<T> solve(std::span<const T> b, std::span<const T> u0, const StationaryConfig& cfg) const;

  const PPSplitting<T>& splitting() const { return sp_; }
  const ShiftMatrix<T>& shift() const { return sigma_; }
  std::size_t inner_iterations() const;

 private:
  PPSplitting<T> sp_;
  ShiftMatrix<T> sigma_;
  SparseMatrix<T> sigma_minus_p1_, sigma_minus_p2_;
  InnerSolver<T> half1_, half2_;
};

template <Scalar T>
Vector<T> pps_step(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::span<const T> u, std::span<const T> b,
                   std::optional<InnerSolveConfig> inner = std::nullopt);

template <Scalar T>
StationaryResult<T> pps_solve(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::span<const T> b,
                              std::span<const T> u0, const StationaryConfig& cfg = {});

}  // namespace ppsolve
