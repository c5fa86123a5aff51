#include "ppsolve/definiteness.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace ppsolve {

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::hpd: return "HPD";
    case Definiteness::hpsd: return "HPSD";
    case Definiteness::pd: return "PD";
    case Definiteness::psd: return "PSD";
    case Definiteness::indefinite: return "indefinite";
  }
  return "indefinite";
}

double DefinitenessReport::margin() const {
  if (std::isnan(lambda_min)) return std::numeric_limits<double>::quiet_NaN();
  switch (kind) {
    case Definiteness::hpd:
    case Definiteness::pd: return lambda_min - tol;
    case Definiteness::hpsd:
    case Definiteness::psd: return lambda_min + tol;
    case Definiteness::indefinite: return lambda_min + tol;
  }
  return lambda_min;
}

template <Scalar T>
double hermitian_min_eigenvalue(const DenseMatrix<T>& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<DenseMatrix<T>> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  return es.eigenvalues()(0);
}

namespace {

Definiteness classify(double lambda_min, double tol, bool hermitian) {
  if (lambda_min > tol) return hermitian ? Definiteness::hpd : Definiteness::pd;
  if (lambda_min >= -tol) return hermitian ? Definiteness::hpsd : Definiteness::psd;
  return Definiteness::indefinite;
}

template <Scalar T>
bool cholesky_succeeds(const SparseMatrix<T>& h, double shift) {
  std::vector<Eigen::Triplet<T>> trips;
  trips.reserve(h.nnz() + h.rows());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (index_t k = h.row_ptr()[i]; k < h.row_ptr()[i + 1]; ++k)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(h.col_idx()[k]), h.values()[k]);
    trips.emplace_back(static_cast<int>(i), static_cast<int>(i), T(shift));
  }
  Eigen::SparseMatrix<T> e(h.rows(), h.cols());
  e.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLLT<Eigen::SparseMatrix<T>> llt(e);
  return llt.info() == Eigen::Success;
}

}  // namespace

template <Scalar T>
DefinitenessReport definiteness(const SparseMatrix<T>& m, const DefinitenessOptions& opts) {
  if (!m.is_square()) throw DimensionError("definiteness: matrix must be square");
  DefinitenessReport rep;
  const double fro = frobenius_norm(m);
  rep.tol = opts.tol >= 0.0 ? opts.tol : 1e-10 * fro;
  rep.hermitian = is_hermitian(m, rep.tol);
  const SparseMatrix<T> h = hermitian_part(m);

  if (h.is_diagonal() && !opts.force_dense) {
    double lmin = std::numeric_limits<double>::infinity();
    for (const T& d : h.diagonal_values()) lmin = std::min(lmin, real_part(d));
    rep.lambda_min = m.rows() == 0 ? 0.0 : lmin;
    rep.method = "diagonal";
  } else if (m.rows() <= opts.dense_cap) {
    rep.lambda_min = hermitian_min_eigenvalue<T>(to_dense(h));
    rep.method = "dense";
  } else if (opts.force_dense) {
    throw SizeCapError("definiteness: dense path refused for n = " + std::to_string(m.rows()) + " above cap " +
                       std::to_string(opts.dense_cap));
  } else {
    // H - tol*I Cholesky-factorizable certifies lambda_min > tol; otherwise
    // H + tol*I factorizable certifies lambda_min >= -tol.
    rep.method = "cholesky";
    rep.lambda_min = std::numeric_limits<double>::quiet_NaN();
    if (cholesky_succeeds(h, -rep.tol)) {
      rep.kind = rep.hermitian ? Definiteness::hpd : Definiteness::pd;
    } else if (cholesky_succeeds(h, rep.tol)) {
      rep.kind = rep.hermitian ? Definiteness::hpsd : Definiteness::psd;
    } else {
      rep.kind = Definiteness::indefinite;
    }
    return rep;
  }
  rep.kind = classify(rep.lambda_min, rep.tol, rep.hermitian);
  return rep;
}

template DefinitenessReport definiteness(const SparseMatrix<double>&, const DefinitenessOptions&);
template DefinitenessReport definiteness(const SparseMatrix<complex_t>&, const DefinitenessOptions&);
template double hermitian_min_eigenvalue(const DenseMatrix<double>&);
template double hermitian_min_eigenvalue(const DenseMatrix<complex_t>&);

}  // namespace ppsolve
