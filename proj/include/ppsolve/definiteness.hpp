#pragma once

#include <string>
#include <string_view>

#include "ppsolve/sparse_matrix.hpp"

namespace ppsolve {

enum class Definiteness { hpd, hpsd, pd, psd, indefinite };

std::string_view to_string(Definiteness d);

inline bool is_psd(Definiteness d) { return d != Definiteness::indefinite; }
inline bool is_pd(Definiteness d) { return d == Definiteness::hpd || d == Definiteness::pd; }
inline bool is_hermitian_kind(Definiteness d) { return d == Definiteness::hpd || d == Definiteness::hpsd; }

struct DefinitenessOptions {
  /// Negative means 1e-10 * ||M||_F.
  double tol = -1.0;
  /// Largest n for the dense eigenvalue path; above it a sparse Cholesky
  /// attempt on the Hermitian part decides.
  std::size_t dense_cap = 2000;
  bool force_dense = false;
};

struct DefinitenessReport {
  Definiteness kind = Definiteness::indefinite;
  /// Smallest eigenvalue of (M + M^*)/2; NaN when only the Cholesky
  /// certificate was run.
  double lambda_min = 0.0;
  double tol = 0.0;
  bool hermitian = false;
  std::string method;  // "diagonal", "dense", "cholesky"

  /// Distance of lambda_min from the threshold of the reported class.
  double margin() const;
};

/// Raised when the dense path is requested above the size cap.
class SizeCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <Scalar T>
DefinitenessReport definiteness(const SparseMatrix<T>& m, const DefinitenessOptions& opts = {});

/// Smallest eigenvalue of a dense Hermitian matrix (only the lower triangle is read).
template <Scalar T>
double hermitian_min_eigenvalue(const DenseMatrix<T>& h);

}  // namespace ppsolve
