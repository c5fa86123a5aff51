#pragma once

#include <atomic>
#include <memory>
#include <optional>

#include "ppsolve/inner_solver.hpp"
#include "ppsolve/shift.hpp"
#include "ppsolve/splitting.hpp"

namespace ppsolve {

/// Work counters for preconditioner applications.
struct ApplyStats {
  std::atomic<std::size_t> applies{0};
  std::atomic<std::size_t> schur_applies{0};
  std::atomic<std::size_t> spmv{0};
  std::atomic<std::size_t> diagonal_scales{0};
  std::atomic<std::size_t> shift_solves{0};
  std::atomic<std::size_t> axpy{0};

  void reset() {
    applies = schur_applies = spmv = diagonal_scales = shift_solves = axpy = 0;
  }
};

/// y = (Sigma+P1)^{-1} Sigma (Sigma+P2)^{-1} v, the inverse of
/// (Sigma+P2) Sigma^{-1} (Sigma+P1).
template <Scalar T>
class PpsPreconditioner {
 public:
  PpsPreconditioner(PPSplitting<T> sp, ShiftMatrix<T> sigma, const InnerSolveConfig& inner = {});

  Vector<T> apply(std::span<const T> v) const;
  LinearOperator<T> as_operator() const;
  std::size_t size() const;
  std::size_t inner_iterations() const;
  std::size_t inner_unconverged() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

enum class SppsVariant { spps1, spps2 };

/// Blocks of [A B; C D] as operators, with the structural facts that decide
/// whether the inner systems are HPD. Matrix-free problems fill the flags
/// from their known structure; from_system computes them.
template <Scalar T>
struct SppsBlocks {
  std::size_t n = 0, m = 0;
  RectOperator<T> A, B, C, D;
  bool a_hermitian_psd = false;
  bool d_hermitian_psd = false;
  bool c_is_minus_b_adjoint = false;
  /// Present when the blocks are stored matrices.
  std::optional<BlockSaddleSystem<T>> system;

  static SppsBlocks from_system(const BlockSaddleSystem<T>& s);
};

/// SPPS1: P1 = [A B; C 0], P2 = diag(0, D), Sigma = diag(Sigma1, Sigma2).
/// SPPS2: P1 = [0 B; C D], P2 = diag(A, 0).
/// Applied blockwise through a matrix-free Schur complement.
template <Scalar T>
class SppsOperator {
 public:
  SppsOperator(SppsBlocks<T> blocks, ShiftMatrix<T> sigma1, ShiftMatrix<T> sigma2, SppsVariant variant,
               const InnerSolveConfig& inner = {});

  Vector<T> apply(std::span<const T> x) const;
  LinearOperator<T> as_operator() const;

  /// v -> S v with S = A + Sigma1 - B Sigma2^{-1} C (SPPS1) or
  /// D + Sigma2 - C Sigma1^{-1} B (SPPS2). Never assembled.
  LinearOperator<T> schur_operator() const;

  SppsVariant variant() const;
  std::size_t size() const;
  bool schur_certified_hpd() const;
  bool first_stage_certified_hpd() const;
  /// The splitting whose P1 the variant requires to be PSD was certified.
  std::optional<bool> p1_certified_psd() const;
  const ApplyStats& stats() const;
  std::size_t inner_iterations() const;
  std::size_t inner_unconverged() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Sigma1, Sigma2 as the diagonal blocks of alpha * Q.
template <Scalar T>
std::pair<ShiftMatrix<T>, ShiftMatrix<T>> split_shift(const SparseMatrix<T>& q, double alpha, std::size_t n);

}  // namespace ppsolve
