#include "ppsolve/shift.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "ppsolve/krylov.hpp"
#include "ppsolve/splitting.hpp"

namespace ppsolve {

std::string_view to_string(ShiftSolver s) {
  switch (s) {
    case ShiftSolver::diagonal: return "diagonal";
    case ShiftSolver::dense_cholesky: return "dense_cholesky";
    case ShiftSolver::inner_cg: return "inner_cg";
  }
  return "diagonal";
}

namespace {
constexpr std::size_t kDenseCholeskyCap = 2000;
}

template <Scalar T>
struct ShiftMatrix<T>::Factor {
  Vector<T> inv_diag;
  Eigen::LLT<DenseMatrix<T>> llt;
  LinearOperator<T> op;
};

template <Scalar T>
ShiftMatrix<T>::ShiftMatrix(SparseMatrix<T> q, double alpha, bool certify) : alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("shift: alpha must be positive");
  require_dims(q.is_square(), "shift: Q must be square");
  if (certify) require_hpd(q, "shift Q");
  q_ = std::make_shared<const SparseMatrix<T>>(std::move(q));
  sigma_ = std::make_shared<const SparseMatrix<T>>(scaled(T(alpha), *q_));
  auto f = std::make_shared<Factor>();
  if (q_->is_diagonal()) {
    solver_ = ShiftSolver::diagonal;
    f->inv_diag = sigma_->diagonal_values();
    for (auto& d : f->inv_diag) d = T(1) / d;
  } else if (q_->rows() <= kDenseCholeskyCap) {
    solver_ = ShiftSolver::dense_cholesky;
    f->llt.compute(to_dense(*sigma_));
    if (f->llt.info() != Eigen::Success) throw std::invalid_argument("shift: Cholesky of Sigma failed");
  } else {
    solver_ = ShiftSolver::inner_cg;
    f->op = make_operator(*sigma_);
  }
  factor_ = std::move(f);
}

template <Scalar T>
void ShiftMatrix<T>::solve(std::span<const T> v, std::span<T> out) const {
  require_dims(v.size() == size() && out.size() == size(), "shift solve: length mismatch");
  switch (solver_) {
    case ShiftSolver::diagonal:
      for (std::size_t i = 0; i < v.size(); ++i) out[i] = factor_->inv_diag[i] * v[i];
      return;
    case ShiftSolver::dense_cholesky: {
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(v.data(), static_cast<Eigen::Index>(v.size()));
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> x(out.data(), static_cast<Eigen::Index>(out.size()));
      x = factor_->llt.solve(b);
      return;
    }
    case ShiftSolver::inner_cg: {
      KrylovConfig kc;
      kc.rel_tol = 1e-13;
      kc.max_iters = 10 * size();
      kc.record_history = false;
      const auto res = cg<T>(factor_->op, v, kc);
      std::copy(res.x.begin(), res.x.end(), out.begin());
      return;
    }
  }
}

template <Scalar T>
Vector<T> ShiftMatrix<T>::solve(std::span<const T> v) const {
  Vector<T> out(v.size());
  solve(v, out);
  return out;
}

namespace {

template <Scalar T>
DenseMatrix<T> hermitian_power(const SparseMatrix<T>& s, double power) {
  if (s.is_diagonal()) {
    DenseMatrix<T> d = DenseMatrix<T>::Zero(s.rows(), s.cols());
    const Vector<T> diag = s.diagonal_values();
    for (std::size_t i = 0; i < diag.size(); ++i) d(i, i) = T(std::pow(real_part(diag[i]), power));
    return d;
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix<T>> es(to_dense(s));
  if (es.info() != Eigen::Success) throw std::runtime_error("shift: eigendecomposition failed");
  const Eigen::VectorXd lam = es.eigenvalues().array().pow(power);
  return es.eigenvectors() * lam.template cast<T>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

template <Scalar T>
DenseMatrix<T> ShiftMatrix<T>::sqrt_dense() const {
  return hermitian_power(*sigma_, 0.5);
}

template <Scalar T>
DenseMatrix<T> ShiftMatrix<T>::inv_sqrt_dense() const {
  return hermitian_power(*sigma_, -0.5);
}

template class ShiftMatrix<double>;
template class ShiftMatrix<complex_t>;

}  // namespace ppsolve
