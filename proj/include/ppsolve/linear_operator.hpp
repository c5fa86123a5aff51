#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>

#include "ppsolve/sparse_matrix.hpp"
#include "ppsolve/vector_ops.hpp"

namespace ppsolve {

/// Square linear map given by a closure. The closure must be reentrant:
/// one operator may be applied from several threads at once.
template <Scalar T>
class LinearOperator {
 public:
  using ApplyFn = std::function<void(std::span<const T>, std::span<T>)>;

  LinearOperator() = default;
  LinearOperator(std::size_t n, ApplyFn apply, ApplyFn adjoint = {})
      : n_(n), apply_(std::move(apply)), adjoint_(std::move(adjoint)) {}

  std::size_t size() const { return n_; }
  bool has_adjoint() const { return static_cast<bool>(adjoint_); }
  explicit operator bool() const { return static_cast<bool>(apply_); }

  void apply(std::span<const T> x, std::span<T> y) const {
    require_dims(x.size() == n_ && y.size() == n_, "LinearOperator::apply: length mismatch");
    apply_(x, y);
  }
  Vector<T> apply(std::span<const T> x) const {
    Vector<T> y(n_);
    apply(x, y);
    return y;
  }
  void apply_adjoint(std::span<const T> x, std::span<T> y) const {
    if (!adjoint_) throw std::logic_error("LinearOperator: no adjoint supplied");
    require_dims(x.size() == n_ && y.size() == n_, "LinearOperator::apply_adjoint: length mismatch");
    adjoint_(x, y);
  }

 private:
  std::size_t n_ = 0;
  ApplyFn apply_;
  ApplyFn adjoint_;
};

/// Possibly rectangular linear map, used for off-diagonal blocks.
template <Scalar T>
struct RectOperator {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<void(std::span<const T>, std::span<T>)> fn;

  void apply(std::span<const T> x, std::span<T> y) const {
    require_dims(x.size() == cols && y.size() == rows, "RectOperator::apply: length mismatch");
    fn(x, y);
  }
  Vector<T> apply(std::span<const T> x) const {
    Vector<T> y(rows);
    apply(x, y);
    return y;
  }
};

template <Scalar T>
RectOperator<T> make_rect_operator(SparseMatrix<T> m) {
  auto mat = std::make_shared<const SparseMatrix<T>>(std::move(m));
  return {mat->rows(), mat->cols(), [mat](std::span<const T> x, std::span<T> y) { mat->multiply(x, y); }};
}

/// Operator view of a square sparse matrix; shares ownership of a copy.
template <Scalar T>
LinearOperator<T> make_operator(SparseMatrix<T> m) {
  require_dims(m.is_square(), "make_operator: matrix must be square");
  auto mat = std::make_shared<const SparseMatrix<T>>(std::move(m));
  auto adj = std::make_shared<const SparseMatrix<T>>(mat->adjoint());
  return LinearOperator<T>(
      mat->rows(), [mat](std::span<const T> x, std::span<T> y) { mat->multiply(x, y); },
      [adj](std::span<const T> x, std::span<T> y) { adj->multiply(x, y); });
}

template <Scalar T>
LinearOperator<T> identity_operator(std::size_t n) {
  auto copy = [](std::span<const T> x, std::span<T> y) { std::copy(x.begin(), x.end(), y.begin()); };
  return LinearOperator<T>(n, copy, copy);
}

/// Dense matrix of an operator, column by column. Desk-scale only.
template <Scalar T>
DenseMatrix<T> densify(const LinearOperator<T>& op) {
  const std::size_t n = op.size();
  DenseMatrix<T> d(n, n);
  Vector<T> e(n, T(0)), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = T(1);
    op.apply(e, col);
    for (std::size_t i = 0; i < n; ++i) d(i, j) = col[i];
    e[j] = T(0);
  }
  return d;
}

template <Scalar T>
Vector<T> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector<T> v(n);
  for (auto& x : v) {
    if constexpr (is_complex_v<T>)
      x = T(g(rng), g(rng));
    else
      x = g(rng);
  }
  return v;
}

/// Largest relative deviation of op(a x + b y) from a op(x) + b op(y) over
/// random probes.
template <Scalar T>
double linearity_defect(const LinearOperator<T>& op, std::mt19937_64& rng, int probes = 4) {
  double worst = 0.0;
  const std::size_t n = op.size();
  for (int p = 0; p < probes; ++p) {
    const Vector<T> x = random_vector<T>(n, rng), y = random_vector<T>(n, rng);
    const Vector<T> ab = random_vector<T>(2, rng);
    Vector<T> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = ab[0] * x[i] + ab[1] * y[i];
    const Vector<T> oz = op.apply(z), ox = op.apply(x), oy = op.apply(y);
    Vector<T> comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = ab[0] * ox[i] + ab[1] * oy[i];
    const double scale = std::max(norm2(oz), norm2(comb));
    if (scale == 0.0) continue;
    worst = std::max(worst, norm2(subtract<T>(oz, comb)) / scale);
  }
  return worst;
}

}  // namespace ppsolve
