#include "ppsolve/inner_solver.hpp"

#include <Eigen/LU>
#include <Eigen/SparseLU>

namespace ppsolve {

std::string_view to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::automatic: return "auto";
    case InnerMethod::cg: return "cg";
    case InnerMethod::gmres: return "gmres";
    case InnerMethod::direct: return "direct";
  }
  return "auto";
}

InnerMethod inner_method_from_string(std::string_view s) {
  if (s == "auto") return InnerMethod::automatic;
  if (s == "cg") return InnerMethod::cg;
  if (s == "gmres") return InnerMethod::gmres;
  if (s == "direct") return InnerMethod::direct;
  throw std::invalid_argument("unknown inner method '" + std::string(s) + "' (expected auto, cg, gmres, direct)");
}

namespace {
constexpr std::size_t kDenseDirectCap = 2000;
}

template <Scalar T>
struct InnerSolver<T>::Factor {
  Eigen::PartialPivLU<DenseMatrix<T>> dense;
  Eigen::SparseLU<Eigen::SparseMatrix<T>> sparse;
  bool use_sparse = false;
};

template <Scalar T>
InnerSolver<T>::InnerSolver(LinearOperator<T> op, bool hpd, const InnerSolveConfig& cfg, std::string stage,
                            const SparseMatrix<T>* sparse)
    : op_(std::move(op)), cfg_(cfg), stage_(std::move(stage)) {
  if (cfg_.reduction_factor <= 1.0) throw std::invalid_argument("inner reduction_factor must exceed 1");
  method_ = cfg_.method;
  if (method_ == InnerMethod::automatic) method_ = hpd ? InnerMethod::cg : InnerMethod::gmres;
  if (method_ != InnerMethod::direct) return;

  auto f = std::make_shared<Factor>();
  if (sparse && sparse->rows() > kDenseDirectCap) {
    std::vector<Eigen::Triplet<T>> trips;
    trips.reserve(sparse->nnz());
    for (std::size_t i = 0; i < sparse->rows(); ++i)
      for (index_t k = sparse->row_ptr()[i]; k < sparse->row_ptr()[i + 1]; ++k)
        trips.emplace_back(static_cast<int>(i), static_cast<int>(sparse->col_idx()[k]), sparse->values()[k]);
    Eigen::SparseMatrix<T> e(sparse->rows(), sparse->cols());
    e.setFromTriplets(trips.begin(), trips.end());
    e.makeCompressed();
    f->sparse.compute(e);
    if (f->sparse.info() != Eigen::Success) throw InnerSolveError(stage_, "sparse LU factorization failed");
    f->use_sparse = true;
  } else {
    if (op_.size() > kDenseDirectCap && !sparse)
      throw InnerSolveError(stage_, "direct solve of a matrix-free operator above the dense cap");
    f->dense.compute(sparse ? to_dense(*sparse) : densify(op_));
  }
  factor_ = std::move(f);
}

template <Scalar T>
Vector<T> InnerSolver<T>::solve(std::span<const T> rhs) const {
  require_dims(rhs.size() == op_.size(), stage_ + ": rhs length mismatch");
  ++stats_->solves;
  if (method_ == InnerMethod::direct) {
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    Eigen::Matrix<T, Eigen::Dynamic, 1> x = factor_->use_sparse ? Eigen::Matrix<T, Eigen::Dynamic, 1>(factor_->sparse.solve(b))
                                                                : Eigen::Matrix<T, Eigen::Dynamic, 1>(factor_->dense.solve(b));
    return Vector<T>(x.data(), x.data() + x.size());
  }
  KrylovConfig kc;
  kc.restart = cfg_.restart;
  kc.rel_tol = 1.0 / cfg_.reduction_factor;
  kc.max_iters = cfg_.max_inner_iters;
  kc.record_history = false;
  KrylovResult<T> res = method_ == InnerMethod::cg ? cg<T>(op_, rhs, kc) : gmres<T>(op_, rhs, kc);
  stats_->iterations += res.report.iterations;
  if (!res.report.converged) {
    ++stats_->unconverged;
    if (cfg_.strict)
      throw InnerSolveError(stage_, "inner " + std::string(to_string(method_)) + " reached relative residual " +
                                        std::to_string(res.report.final_relative_residual) + " after " +
                                        std::to_string(res.report.iterations) + " iterations");
  }
  return std::move(res.x);
}

template class InnerSolver<double>;
template class InnerSolver<complex_t>;

}  // namespace ppsolve
