#include "ppsolve/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ppsolve/kernels.hpp"

namespace ppsolve {

template <Scalar T>
SparseMatrix<T>::SparseMatrix(std::size_t nrows, std::size_t ncols, std::vector<index_t> row_ptr,
                              std::vector<index_t> col_idx, std::vector<T> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != nrows_ + 1) throw std::invalid_argument("CSR: row_ptr must have nrows+1 entries");
  if (row_ptr_.front() != 0) throw std::invalid_argument("CSR: row_ptr[0] must be 0");
  if (col_idx_.size() != values_.size()) throw std::invalid_argument("CSR: col_idx/values length mismatch");
  if (static_cast<std::size_t>(row_ptr_.back()) != values_.size())
    throw std::invalid_argument("CSR: row_ptr[nrows] must equal nnz");
  for (std::size_t i = 0; i < nrows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) throw std::invalid_argument("CSR: row_ptr must be nondecreasing");
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const index_t c = col_idx_[k];
      if (c < 0 || static_cast<std::size_t>(c) >= ncols_) {
        std::ostringstream msg;
        msg << "CSR: column index " << c << " out of range in row " << i;
        throw std::invalid_argument(msg.str());
      }
      if (k > row_ptr_[i] && col_idx_[k - 1] >= c) {
        std::ostringstream msg;
        msg << "CSR: column indices not strictly increasing (duplicate or unsorted) in row " << i;
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::from_triplets(std::size_t nrows, std::size_t ncols,
                                               std::vector<Triplet<T>> entries) {
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < 0 || static_cast<std::size_t>(e.row) >= nrows ||
        static_cast<std::size_t>(e.col) >= ncols) {
      std::ostringstream msg;
      msg << "triplet (" << e.row << ", " << e.col << ") out of range for " << nrows << "x" << ncols;
      throw std::invalid_argument(msg.str());
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet<T>& a, const Triplet<T>& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<index_t> row_ptr(nrows + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k > 0 && entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      std::ostringstream msg;
      msg << "duplicate entry at (" << entries[k].row << ", " << entries[k].col << ")";
      throw std::invalid_argument(msg.str());
    }
    ++row_ptr[entries[k].row + 1];
    col_idx.push_back(entries[k].col);
    values.push_back(entries[k].value);
  }
  for (std::size_t i = 0; i < nrows; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseMatrix(nrows, ncols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::from_dense(const DenseMatrix<T>& dense, double drop_tol) {
  std::vector<index_t> row_ptr(dense.rows() + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    for (Eigen::Index j = 0; j < dense.cols(); ++j) {
      if (std::abs(dense(i, j)) > drop_tol) {
        col_idx.push_back(j);
        values.push_back(dense(i, j));
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix(dense.rows(), dense.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::identity(std::size_t n) {
  std::vector<T> ones(n, T(1));
  return diagonal(ones);
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::zeros(std::size_t nrows, std::size_t ncols) {
  return SparseMatrix(nrows, ncols, std::vector<index_t>(nrows + 1, 0), {}, {});
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::diagonal(std::span<const T> diag) {
  const std::size_t n = diag.size();
  std::vector<index_t> row_ptr(n + 1);
  std::vector<index_t> col_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_ptr[i + 1] = static_cast<index_t>(i + 1);
    col_idx[i] = static_cast<index_t>(i);
  }
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<T>(diag.begin(), diag.end()));
}

template <Scalar T>
T SparseMatrix<T>::at(std::size_t i, std::size_t j) const {
  require_dims(i < nrows_ && j < ncols_, "SparseMatrix::at out of range");
  const auto first = col_idx_.begin() + row_ptr_[i];
  const auto last = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(first, last, static_cast<index_t>(j));
  if (it != last && *it == static_cast<index_t>(j)) return values_[it - col_idx_.begin()];
  return T(0);
}

template <Scalar T>
void SparseMatrix<T>::multiply(std::span<const T> x, std::span<T> y) const {
  require_dims(x.size() == ncols_, "spmv: ncols(M) != len(x)");
  require_dims(y.size() == nrows_, "spmv: nrows(M) != len(y)");
  if constexpr (std::is_same_v<T, double>) {
    kernels::spmv_csr(nrows_, row_ptr_.data(), col_idx_.data(), values_.data(), x.data(), y.data());
  } else {
    for (std::size_t i = 0; i < nrows_; ++i) {
      T s{};
      for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
      y[i] = s;
    }
  }
}

template <Scalar T>
Vector<T> SparseMatrix<T>::multiply(std::span<const T> x) const {
  Vector<T> y(nrows_);
  multiply(x, y);
  return y;
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::transpose() const {
  std::vector<index_t> row_ptr(ncols_ + 1, 0);
  for (index_t c : col_idx_) ++row_ptr[c + 1];
  for (std::size_t j = 0; j < ncols_; ++j) row_ptr[j + 1] += row_ptr[j];
  std::vector<index_t> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<index_t> col_idx(nnz());
  std::vector<T> values(nnz());
  // Rows are visited in order, so each transposed row comes out sorted.
  for (std::size_t i = 0; i < nrows_; ++i) {
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const index_t dst = next[col_idx_[k]]++;
      col_idx[dst] = static_cast<index_t>(i);
      values[dst] = values_[k];
    }
  }
  return SparseMatrix(ncols_, nrows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::adjoint() const {
  SparseMatrix t = transpose();
  if constexpr (is_complex_v<T>) {
    for (auto& v : t.values_) v = std::conj(v);
  }
  return t;
}

template <Scalar T>
Vector<T> SparseMatrix<T>::diagonal_values() const {
  const std::size_t n = std::min(nrows_, ncols_);
  Vector<T> d(n, T(0));
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

template <Scalar T>
bool SparseMatrix<T>::is_diagonal() const {
  for (std::size_t i = 0; i < nrows_; ++i)
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (static_cast<std::size_t>(col_idx_[k]) != i && values_[k] != T(0)) return false;
  return true;
}

template <Scalar T>
SparseMatrix<T> SparseMatrix<T>::pruned(double tol) const {
  std::vector<index_t> row_ptr(nrows_ + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  for (std::size_t i = 0; i < nrows_; ++i) {
    for (index_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (std::abs(values_[k]) > tol) {
        col_idx.push_back(col_idx_[k]);
        values.push_back(values_[k]);
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix(nrows_, ncols_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
Vector<T> spmv(const SparseMatrix<T>& m, std::span<const T> x) {
  return m.multiply(x);
}

template <Scalar T>
SparseMatrix<T> linear_combination(T a, const SparseMatrix<T>& x, T b, const SparseMatrix<T>& y) {
  require_dims(x.rows() == y.rows() && x.cols() == y.cols(), "matrix sum: shape mismatch");
  const auto xr = x.row_ptr(), xc = x.col_idx(), yr = y.row_ptr(), yc = y.col_idx();
  const auto xv = x.values(), yv = y.values();
  std::vector<index_t> row_ptr(x.rows() + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  col_idx.reserve(x.nnz() + y.nnz());
  values.reserve(x.nnz() + y.nnz());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    index_t p = xr[i], q = yr[i];
    while (p < xr[i + 1] || q < yr[i + 1]) {
      if (q >= yr[i + 1] || (p < xr[i + 1] && xc[p] < yc[q])) {
        col_idx.push_back(xc[p]);
        values.push_back(a * xv[p]);
        ++p;
      } else if (p >= xr[i + 1] || yc[q] < xc[p]) {
        col_idx.push_back(yc[q]);
        values.push_back(b * yv[q]);
        ++q;
      } else {
        col_idx.push_back(xc[p]);
        values.push_back(a * xv[p] + b * yv[q]);
        ++p;
        ++q;
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix<T>(x.rows(), x.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> scaled(T a, const SparseMatrix<T>& x) {
  std::vector<T> values(x.values().begin(), x.values().end());
  for (auto& v : values) v *= a;
  return SparseMatrix<T>(x.rows(), x.cols(), {x.row_ptr().begin(), x.row_ptr().end()},
                         {x.col_idx().begin(), x.col_idx().end()}, std::move(values));
}

template <Scalar T>
SparseMatrix<T> hermitian_part(const SparseMatrix<T>& m) {
  if (!m.is_square()) throw DimensionError("hermitian_part: matrix must be square");
  return linear_combination(T(0.5), m, T(0.5), m.adjoint());
}

template <Scalar T>
SparseMatrix<T> skew_part(const SparseMatrix<T>& m) {
  if (!m.is_square()) throw DimensionError("skew_part: matrix must be square");
  return linear_combination(T(0.5), m, T(-0.5), m.adjoint());
}

template <Scalar T>
double frobenius_norm(const SparseMatrix<T>& m) {
  double s = 0.0;
  for (const T& v : m.values()) s += abs2(v);
  return std::sqrt(s);
}

template <Scalar T>
double max_abs_difference(const SparseMatrix<T>& x, const SparseMatrix<T>& y) {
  const SparseMatrix<T> d = x - y;
  double worst = 0.0;
  for (const T& v : d.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

template <Scalar T>
bool is_hermitian(const SparseMatrix<T>& m, double tol) {
  return m.is_square() && max_abs_difference(m, m.adjoint()) <= tol;
}

template <Scalar T>
bool is_skew_hermitian(const SparseMatrix<T>& m, double tol) {
  if (!m.is_square()) return false;
  const SparseMatrix<T> sum = m + m.adjoint();
  for (const T& v : sum.values())
    if (std::abs(v) > tol) return false;
  return true;
}

namespace {

template <Scalar T, typename Keep>
SparseMatrix<T> filter_entries(const SparseMatrix<T>& m, Keep keep) {
  std::vector<index_t> row_ptr(m.rows() + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  const auto rp = m.row_ptr(), ci = m.col_idx();
  const auto vals = m.values();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (index_t k = rp[i]; k < rp[i + 1]; ++k) {
      if (keep(static_cast<index_t>(i), ci[k])) {
        col_idx.push_back(ci[k]);
        values.push_back(vals[k]);
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix<T>(m.rows(), m.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

}  // namespace

template <Scalar T>
SparseMatrix<T> strictly_lower(const SparseMatrix<T>& m) {
  return filter_entries(m, [](index_t i, index_t j) { return j < i; });
}

template <Scalar T>
SparseMatrix<T> strictly_upper(const SparseMatrix<T>& m) {
  return filter_entries(m, [](index_t i, index_t j) { return j > i; });
}

template <Scalar T>
SparseMatrix<T> diagonal_part(const SparseMatrix<T>& m) {
  return filter_entries(m, [](index_t i, index_t j) { return j == i; });
}

template <Scalar T>
SparseMatrix<T> block_assemble(const SparseMatrix<T>& a, const SparseMatrix<T>& b, const SparseMatrix<T>& c,
                               const SparseMatrix<T>& d) {
  require_dims(a.rows() == b.rows() && c.rows() == d.rows() && a.cols() == c.cols() && b.cols() == d.cols(),
               "block_assemble: inconsistent block shapes");
  const std::size_t n = a.rows(), m = c.rows(), nc = a.cols(), mc = b.cols();
  std::vector<index_t> row_ptr(n + m + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  col_idx.reserve(a.nnz() + b.nnz() + c.nnz() + d.nnz());
  values.reserve(col_idx.capacity());
  auto append_row = [&](const SparseMatrix<T>& blk, std::size_t i, index_t offset) {
    for (index_t k = blk.row_ptr()[i]; k < blk.row_ptr()[i + 1]; ++k) {
      col_idx.push_back(blk.col_idx()[k] + offset);
      values.push_back(blk.values()[k]);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    append_row(a, i, 0);
    append_row(b, i, static_cast<index_t>(nc));
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  for (std::size_t i = 0; i < m; ++i) {
    append_row(c, i, 0);
    append_row(d, i, static_cast<index_t>(nc));
    row_ptr[n + i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix<T>(n + m, nc + mc, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> submatrix(const SparseMatrix<T>& m, std::size_t r0, std::size_t c0, std::size_t nr,
                          std::size_t nc) {
  require_dims(r0 + nr <= m.rows() && c0 + nc <= m.cols(), "submatrix: range exceeds matrix");
  std::vector<index_t> row_ptr(nr + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  for (std::size_t i = 0; i < nr; ++i) {
    for (index_t k = m.row_ptr()[r0 + i]; k < m.row_ptr()[r0 + i + 1]; ++k) {
      const index_t c = m.col_idx()[k];
      if (c >= static_cast<index_t>(c0) && c < static_cast<index_t>(c0 + nc)) {
        col_idx.push_back(c - static_cast<index_t>(c0));
        values.push_back(m.values()[k]);
      }
    }
    row_ptr[i + 1] = static_cast<index_t>(values.size());
  }
  return SparseMatrix<T>(nr, nc, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
SparseMatrix<T> kron(const SparseMatrix<T>& a, const SparseMatrix<T>& b) {
  const std::size_t rows = a.rows() * b.rows(), cols = a.cols() * b.cols();
  std::vector<index_t> row_ptr(rows + 1, 0);
  std::vector<index_t> col_idx;
  std::vector<T> values;
  col_idx.reserve(a.nnz() * b.nnz());
  values.reserve(a.nnz() * b.nnz());
  for (std::size_t ia = 0; ia < a.rows(); ++ia) {
    for (std::size_t ib = 0; ib < b.rows(); ++ib) {
      for (index_t ka = a.row_ptr()[ia]; ka < a.row_ptr()[ia + 1]; ++ka) {
        const index_t base = a.col_idx()[ka] * static_cast<index_t>(b.cols());
        for (index_t kb = b.row_ptr()[ib]; kb < b.row_ptr()[ib + 1]; ++kb) {
          col_idx.push_back(base + b.col_idx()[kb]);
          values.push_back(a.values()[ka] * b.values()[kb]);
        }
      }
      row_ptr[ia * b.rows() + ib + 1] = static_cast<index_t>(values.size());
    }
  }
  return SparseMatrix<T>(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

template <Scalar T>
DenseMatrix<T> to_dense(const SparseMatrix<T>& m) {
  DenseMatrix<T> d = DenseMatrix<T>::Zero(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) d(i, m.col_idx()[k]) = m.values()[k];
  return d;
}

SparseMatrix<complex_t> to_complex(const SparseMatrix<double>& m) {
  std::vector<complex_t> values(m.values().begin(), m.values().end());
  return SparseMatrix<complex_t>(m.rows(), m.cols(), {m.row_ptr().begin(), m.row_ptr().end()},
                                 {m.col_idx().begin(), m.col_idx().end()}, std::move(values));
}

Vector<complex_t> to_complex(std::span<const double> v) { return Vector<complex_t>(v.begin(), v.end()); }

#define PPSOLVE_INSTANTIATE(T)                                                                              \
  template class SparseMatrix<T>;                                                                           \
  template Vector<T> spmv(const SparseMatrix<T>&, std::span<const T>);                                      \
  template SparseMatrix<T> linear_combination(T, const SparseMatrix<T>&, T, const SparseMatrix<T>&);        \
  template SparseMatrix<T> scaled(T, const SparseMatrix<T>&);                                               \
  template SparseMatrix<T> hermitian_part(const SparseMatrix<T>&);                                          \
  template SparseMatrix<T> skew_part(const SparseMatrix<T>&);                                               \
  template double frobenius_norm(const SparseMatrix<T>&);                                                   \
  template double max_abs_difference(const SparseMatrix<T>&, const SparseMatrix<T>&);                       \
  template bool is_hermitian(const SparseMatrix<T>&, double);                                               \
  template bool is_skew_hermitian(const SparseMatrix<T>&, double);                                          \
  template SparseMatrix<T> strictly_lower(const SparseMatrix<T>&);                                          \
  template SparseMatrix<T> strictly_upper(const SparseMatrix<T>&);                                          \
  template SparseMatrix<T> diagonal_part(const SparseMatrix<T>&);                                           \
  template SparseMatrix<T> block_assemble(const SparseMatrix<T>&, const SparseMatrix<T>&,                   \
                                          const SparseMatrix<T>&, const SparseMatrix<T>&);                  \
  template SparseMatrix<T> submatrix(const SparseMatrix<T>&, std::size_t, std::size_t, std::size_t,         \
                                     std::size_t);                                                          \
  template SparseMatrix<T> kron(const SparseMatrix<T>&, const SparseMatrix<T>&);                            \
  template DenseMatrix<T> to_dense(const SparseMatrix<T>&);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
