#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "ppsolve/krylov.hpp"

namespace ppsolve {

enum class InnerMethod { automatic, cg, gmres, direct };

std::string_view to_string(InnerMethod m);
InnerMethod inner_method_from_string(std::string_view s);

/// Stopping rule for inner solves: residual reduced by reduction_factor or
/// max_inner_iters reached. automatic picks CG for certified HPD systems and
/// restarted GMRES otherwise; direct factors the matrix (desk scale).
struct InnerSolveConfig {
  InnerMethod method = InnerMethod::automatic;
  std::size_t restart = 10;
  double reduction_factor = 10.0;
  std::size_t max_inner_iters = 50;
  /// Throw InnerSolveError instead of accepting an unconverged inner solve.
  bool strict = false;

  static InnerSolveConfig exact() { return {InnerMethod::direct, 10, 1e14, 1, true}; }
};

class InnerSolveError : public std::runtime_error {
 public:
  InnerSolveError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct InnerStats {
  std::atomic<std::size_t> solves{0};
  std::atomic<std::size_t> iterations{0};
  std::atomic<std::size_t> unconverged{0};

  void reset() {
    solves = 0;
    iterations = 0;
    unconverged = 0;
  }
};

/// Solver for one fixed inner system, reused across many right-hand sides.
template <Scalar T>
class InnerSolver {
 public:
  InnerSolver() = default;
  /// sparse, when given, is used for the direct factorization instead of
  /// densifying the operator.
  InnerSolver(LinearOperator<T> op, bool hpd, const InnerSolveConfig& cfg, std::string stage,
              const SparseMatrix<T>* sparse = nullptr);

  Vector<T> solve(std::span<const T> rhs) const;

  InnerMethod method() const { return method_; }
  std::size_t size() const { return op_.size(); }
  const InnerStats& stats() const { return *stats_; }
  void reset_stats() const { stats_->reset(); }
  /// Share counters with another solver, for aggregate reporting.
  void share_stats(std::shared_ptr<InnerStats> s) { stats_ = std::move(s); }

 private:
  struct Factor;

  LinearOperator<T> op_;
  InnerSolveConfig cfg_;
  InnerMethod method_ = InnerMethod::gmres;
  std::string stage_;
  std::shared_ptr<const Factor> factor_;
  std::shared_ptr<InnerStats> stats_ = std::make_shared<InnerStats>();
};

}  // namespace ppsolve
