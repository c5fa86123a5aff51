#pragma once

#include <memory>

#include "ppsolve/linear_operator.hpp"

namespace ppsolve {

enum class ShiftSolver { diagonal, dense_cholesky, inner_cg };

std::string_view to_string(ShiftSolver s);

/// Sigma = alpha * Q with Q HPD, plus a solver for Sigma. Diagonal Q is
/// inverted entrywise, Q up to the dense cap is Cholesky-factored, larger
/// Q falls back to CG at relative tolerance 1e-13.
template <Scalar T>
class ShiftMatrix {
 public:
  ShiftMatrix() = default;
  ShiftMatrix(SparseMatrix<T> q, double alpha, bool certify = true);

  double alpha() const { return alpha_; }
  const SparseMatrix<T>& Q() const { return *q_; }
  /// alpha * Q as a sparse matrix.
  const SparseMatrix<T>& sigma() const { return *sigma_; }
  std::size_t size() const { return q_->rows(); }
  ShiftSolver solver() const { return solver_; }
  bool is_diagonal() const { return solver_ == ShiftSolver::diagonal; }

  void apply(std::span<const T> x, std::span<T> y) const { sigma_->multiply(x, y); }
  /// Sigma^{-1} v.
  Vector<T> solve(std::span<const T> v) const;
  void solve(std::span<const T> v, std::span<T> out) const;

  /// Sigma^{1/2} and Sigma^{-1/2} via Hermitian eigendecomposition
  /// (entrywise roots when diagonal). Desk scale.
  DenseMatrix<T> sqrt_dense() const;
  DenseMatrix<T> inv_sqrt_dense() const;

 private:
  struct Factor;
  std::shared_ptr<const SparseMatrix<T>> q_;
  std::shared_ptr<const SparseMatrix<T>> sigma_;
  double alpha_ = 1.0;
  ShiftSolver solver_ = ShiftSolver::diagonal;
  std::shared_ptr<const Factor> factor_;
};

}  // namespace ppsolve
