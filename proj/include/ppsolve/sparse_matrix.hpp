#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ppsolve/types.hpp"

namespace ppsolve {

template <Scalar T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;  // column-major

template <Scalar T>
struct Triplet {
  index_t row;
  index_t col;
  T value;
};

/// Compressed sparse row matrix. Immutable after construction; column
/// indices are strictly increasing within each row and duplicates are
/// rejected.
template <Scalar T>
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Takes ownership of raw CSR arrays and validates the structure.
  SparseMatrix(std::size_t nrows, std::size_t ncols, std::vector<index_t> row_ptr, std::vector<index_t> col_idx,
               std::vector<T> values);

  /// Builds from unordered triplets. Duplicate (row, col) pairs throw.
  static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols, std::vector<Triplet<T>> entries);
  static SparseMatrix from_dense(const DenseMatrix<T>& dense, double drop_tol = 0.0);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zeros(std::size_t nrows, std::size_t ncols);
  static SparseMatrix diagonal(std::span<const T> diag);

  std::size_t rows() const { return nrows_; }
  std::size_t cols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }
  bool is_square() const { return nrows_ == ncols_; }

  std::span<const index_t> row_ptr() const { return row_ptr_; }
  std::span<const index_t> col_idx() const { return col_idx_; }
  std::span<const T> values() const { return values_; }

  /// Entry (i, j), zero if not stored.
  T at(std::size_t i, std::size_t j) const;

  /// y = M x
  void multiply(std::span<const T> x, std::span<T> y) const;
  Vector<T> multiply(std::span<const T> x) const;

  SparseMatrix adjoint() const;
  SparseMatrix transpose() const;
  Vector<T> diagonal_values() const;
  bool is_diagonal() const;

  /// Drops stored entries whose magnitude is <= tol.
  SparseMatrix pruned(double tol = 0.0) const;

 private:
  std::size_t nrows_ = 0;
  std::size_t ncols_ = 0;
  std::vector<index_t> row_ptr_{0};
  std::vector<index_t> col_idx_;
  std::vector<T> values_;
};

/// y = M x, checked.
template <Scalar T>
Vector<T> spmv(const SparseMatrix<T>& m, std::span<const T> x);

/// a*X + b*Y with the union sparsity pattern.
template <Scalar T>
SparseMatrix<T> linear_combination(T a, const SparseMatrix<T>& x, T b, const SparseMatrix<T>& y);

template <Scalar T>
SparseMatrix<T> operator+(const SparseMatrix<T>& x, const SparseMatrix<T>& y) {
  return linear_combination(T(1), x, T(1), y);
}
template <Scalar T>
SparseMatrix<T> operator-(const SparseMatrix<T>& x, const SparseMatrix<T>& y) {
  return linear_combination(T(1), x, T(-1), y);
}
template <Scalar T>
SparseMatrix<T> scaled(T a, const SparseMatrix<T>& x);

/// (M + M^*)/2. Non-square input throws.
template <Scalar T>
SparseMatrix<T> hermitian_part(const SparseMatrix<T>& m);
/// M - hermitian_part(M).
template <Scalar T>
SparseMatrix<T> skew_part(const SparseMatrix<T>& m);

template <Scalar T>
double frobenius_norm(const SparseMatrix<T>& m);

/// Largest |X_ij - Y_ij| over the union pattern.
template <Scalar T>
double max_abs_difference(const SparseMatrix<T>& x, const SparseMatrix<T>& y);

template <Scalar T>
bool is_hermitian(const SparseMatrix<T>& m, double tol = 0.0);
template <Scalar T>
bool is_skew_hermitian(const SparseMatrix<T>& m, double tol = 0.0);

/// Strictly lower / strictly upper / diagonal parts.
template <Scalar T>
SparseMatrix<T> strictly_lower(const SparseMatrix<T>& m);
template <Scalar T>
SparseMatrix<T> strictly_upper(const SparseMatrix<T>& m);
template <Scalar T>
SparseMatrix<T> diagonal_part(const SparseMatrix<T>& m);

/// [[A, B], [C, D]] placed at block offsets.
template <Scalar T>
SparseMatrix<T> block_assemble(const SparseMatrix<T>& a, const SparseMatrix<T>& b, const SparseMatrix<T>& c,
                               const SparseMatrix<T>& d);
/// Rows [r0, r0+nr), columns [c0, c0+nc).
template <Scalar T>
SparseMatrix<T> submatrix(const SparseMatrix<T>& m, std::size_t r0, std::size_t c0, std::size_t nr,
                          std::size_t nc);

template <Scalar T>
SparseMatrix<T> kron(const SparseMatrix<T>& a, const SparseMatrix<T>& b);

template <Scalar T>
DenseMatrix<T> to_dense(const SparseMatrix<T>& m);

SparseMatrix<complex_t> to_complex(const SparseMatrix<double>& m);
Vector<complex_t> to_complex(std::span<const double> v);

}  // namespace ppsolve
