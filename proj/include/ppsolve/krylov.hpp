#pragma once

#include <stdexcept>

#include "ppsolve/linear_operator.hpp"
#include "ppsolve/report.hpp"

namespace ppsolve {

struct KrylovConfig {
  std::size_t restart = 30;
  /// Stop once ||b - A x|| <= rel_tol * ||b - A x0||.
  double rel_tol = 1e-7;
  std::size_t max_iters = 1000;
  bool record_history = true;
};

template <Scalar T>
struct KrylovResult {
  Vector<T> x;
  IterationReport report;
};

/// CG met p^H A p <= 0, so the operator is not HPD.
class NonPositiveCurvature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Restarted flexible GMRES with right preconditioning. The preconditioner
/// may change between applications; the preconditioned directions are
/// stored. A null m_inv means no preconditioning.
template <Scalar T>
KrylovResult<T> fgmres(const LinearOperator<T>& a, std::span<const T> b, const LinearOperator<T>* m_inv,
                       const KrylovConfig& cfg, std::span<const T> x0 = {});

/// Restarted GMRES without preconditioning.
template <Scalar T>
KrylovResult<T> gmres(const LinearOperator<T>& a, std::span<const T> b, const KrylovConfig& cfg,
                      std::span<const T> x0 = {});

/// Conjugate gradients for HPD operators. cfg.restart is ignored.
template <Scalar T>
KrylovResult<T> cg(const LinearOperator<T>& a, std::span<const T> b, const KrylovConfig& cfg,
                   std::span<const T> x0 = {});

}  // namespace ppsolve
