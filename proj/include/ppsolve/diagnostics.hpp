#pragma once

#include <map>
#include <string>

#include "ppsolve/shift.hpp"
#include "ppsolve/splitting.hpp"

namespace ppsolve {

using CMatrix = DenseMatrix<complex_t>;

/// Raised when a theory identity is violated beyond tolerance.
class TheoryCheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sigma^{-1/2} P_i Sigma^{-1/2} and their sum, densified.
struct ScaledSplitting {
  CMatrix p1, p2, a;
};

template <Scalar T>
ScaledSplitting scale_splitting(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma);

/// (Sigma+P1)^{-1} (Sigma-P2) (Sigma+P2)^{-1} (Sigma-P1), by LU solves.
template <Scalar T>
CMatrix assemble_gamma(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::size_t cap = 2000);

/// (I+P~2)^{-1}... written as P~+^{-1} P~- with P~+ = (I+P~2)(I+P~1),
/// P~- = (I-P~2)(I-P~1); similar to the iteration matrix.
CMatrix similar_gamma(const ScaledSplitting& s);

double spectral_radius(const CMatrix& m);

/// ||(I+P)^{-1}(I-P)||_2. Throws if I+P is numerically singular.
double f_measure(const CMatrix& p);

/// Eigenpairs of P~+^{-1} P~-; cond_x is the 2-norm condition number of the
/// eigenvector matrix, large for (nearly) defective matrices.
struct EigenBasis {
  Eigen::VectorXcd lambda;
  CMatrix x;
  double cond_x = 1.0;
  bool defective = false;
};

EigenBasis eigen_basis(const ScaledSplitting& s);

struct MBounds {
  std::vector<double> m1, m2;
  double f1 = 0.0, f2 = 0.0;
};

/// m1(x) = f(P~2) ||(I-P~1)x|| / ||(I+P~1)x|| written as the quadratic
/// forms of the bound, and m2 at y = (I+P~2)^{-1}(I-P~1)x.
MBounds m_bounds(const ScaledSplitting& s, const CMatrix& eigvecs);

struct ExactRadius {
  double rho = 0.0;
  std::vector<double> r1, r2;
  /// Largest violation of r1 >= r2 >= 0, r1 > 0, relative to r1.
  double worst_violation = 0.0;
};

/// rho = max sqrt((r1 - r2) / (r1 + r2)) over the eigenvectors.
ExactRadius exact_radius_r(const ScaledSplitting& s, const CMatrix& eigvecs);

enum class ConditionStatus { holds, fails, unknown };
std::string_view to_string(ConditionStatus s);

struct ConditionResult {
  ConditionStatus status = ConditionStatus::unknown;
  double margin = 0.0;
  std::string note;
};

struct DiagnoseOptions {
  std::size_t cap = 2000;
  /// Eigenvectors feed the m-bounds, r1/r2 and the eigenvector-based
  /// conditions; skipping them leaves only rho and f.
  bool eigenvectors = true;
  bool similar_form = true;
};

struct ConvergenceDiagnostics {
  std::size_t n = 0;
  double rho = 0.0;
  double rho_similar = -1.0;
  double f_P1 = 0.0, f_P2 = 0.0;
  double m1_max = 0.0, m2_max = 0.0;
  /// max over eigenvectors of min{m1(x), m2(y)}
  double m_bound = 0.0;
  double exact_rho_from_r = -1.0;
  double r_violation = 0.0;
  bool defective = false;
  double eigvec_condition = 1.0;
  std::map<std::string, ConditionResult> conditions;
  bool guaranteed = false;
  std::map<std::string, bool> certificates;
};

template <Scalar T>
std::map<std::string, ConditionResult> check_conditions(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma,
                                                        const ScaledSplitting& s, const EigenBasis* basis);

template <Scalar T>
ConvergenceDiagnostics diagnose(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma,
                                const DiagnoseOptions& opts = {});

/// JSON text of the diagnostics record.
std::string to_json(const ConvergenceDiagnostics& d, int indent = 2);

}  // namespace ppsolve
