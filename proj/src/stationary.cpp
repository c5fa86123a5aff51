#include "ppsolve/stationary.hpp"

#include <chrono>
#include <cmath>

namespace ppsolve {

InnerSolveConfig default_stationary_inner(std::size_t n) {
  if (n <= 512) return InnerSolveConfig::exact();
  InnerSolveConfig c;
  c.method = InnerMethod::automatic;
  c.restart = 30;
  c.reduction_factor = 1e10;
  c.max_inner_iters = 1000;
  c.strict = true;
  return c;
}

namespace {

template <Scalar T>
bool hermitian_psd(const DefinitenessReport& d) {
  return is_hermitian_kind(d.kind);
}

}  // namespace

template <Scalar T>
PpsIteration<T>::PpsIteration(PPSplitting<T> sp, ShiftMatrix<T> sigma, std::optional<InnerSolveConfig> inner)
    : sp_(std::move(sp)), sigma_(std::move(sigma)) {
  require_dims(sigma_.size() == sp_.size(), "PPS iteration: Sigma size must match A");
  const InnerSolveConfig cfg = inner.value_or(default_stationary_inner(sp_.size()));
  sigma_minus_p1_ = sigma_.sigma() - sp_.P1();
  sigma_minus_p2_ = sigma_.sigma() - sp_.P2();
  SparseMatrix<T> plus_p2 = sigma_.sigma() + sp_.P2();
  SparseMatrix<T> plus_p1 = sigma_.sigma() + sp_.P1();
  // CG is only selected when the shifted system is certified Hermitian.
  const bool need_cert = cfg.method == InnerMethod::automatic;
  const bool h2 = need_cert && hermitian_psd<T>(sp_.p2_definiteness());
  const bool h1 = need_cert && hermitian_psd<T>(sp_.p1_definiteness());
  half1_ = InnerSolver<T>(make_operator(plus_p2), h2, cfg, "half-step 1 (Sigma+P2)", &plus_p2);
  half2_ = InnerSolver<T>(make_operator(plus_p1), h1, cfg, "half-step 2 (Sigma+P1)", &plus_p1);
}

template <Scalar T>
Vector<T> PpsIteration<T>::step(std::span<const T> u, std::span<const T> b) const {
  const std::size_t n = sp_.size();
  require_dims(u.size() == n && b.size() == n, "pps_step: length mismatch");
  Vector<T> rhs = sigma_minus_p1_.multiply(u);
  axpy<T>(T(1), b, rhs);
  const Vector<T> half = half1_.solve(rhs);
  sigma_minus_p2_.multiply(half, rhs);
  axpy<T>(T(1), b, rhs);
  return half2_.solve(rhs);
}

template <Scalar T>
std::size_t PpsIteration<T>::inner_iterations() const {
  return half1_.stats().iterations + half2_.stats().iterations;
}

template <Scalar T>
StationaryResult<T> PpsIteration<T>::solve(std::span<const T> b, std::span<const T> u0,
                                           const StationaryConfig& cfg) const {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) throw std::invalid_argument("stationary: beta must lie in (0, 1]");
  const std::size_t n = sp_.size();
  require_dims(b.size() == n, "pps_solve: rhs length mismatch");
  StationaryResult<T> out;
  out.u = u0.empty() ? Vector<T>(n, T(0)) : Vector<T>(u0.begin(), u0.end());
  require_dims(out.u.size() == n, "pps_solve: initial guess length mismatch");
  IterationReport& rep = out.report;
  const std::size_t inner0 = inner_iterations();

  const double bnorm = norm2<T>(b);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  auto relres = [&](const Vector<T>& u) {
    Vector<T> r = sp_.A().multiply(u);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return norm2(r) / scale;
  };
  double rel = relres(out.u);
  const double rel0 = rel;
  rep.residual_history.push_back(rel);
  rep.termination = Termination::max_iters;
  if (rel <= cfg.rel_residual_tol) {
    rep.converged = true;
    rep.termination = Termination::tol_reached;
  }
  while (!rep.converged && rep.iterations < cfg.max_iters) {
    Vector<T> next = step(out.u, b);
    if (cfg.beta != 1.0) {
      for (std::size_t i = 0; i < n; ++i) next[i] = (1.0 - cfg.beta) * out.u[i] + cfg.beta * next[i];
    }
    out.u = std::move(next);
    ++rep.iterations;
    rel = relres(out.u);
    if (cfg.record_history) rep.residual_history.push_back(rel);
    if (rel <= cfg.rel_residual_tol) {
      rep.converged = true;
      rep.termination = Termination::tol_reached;
    } else if (!std::isfinite(rel) || rel > cfg.divergence_factor * std::max(rel0, 1e-300)) {
      rep.termination = Termination::stagnation;
      break;
    }
  }
  rep.final_relative_residual = rel;
  rep.inner_iterations = inner_iterations() - inner0;
  rep.inner_solves = 2 * rep.iterations;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

template <Scalar T>
Vector<T> pps_step(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::span<const T> u, std::span<const T> b,
                   std::optional<InnerSolveConfig> inner) {
  return PpsIteration<T>(sp, sigma, inner).step(u, b);
}

template <Scalar T>
StationaryResult<T> pps_solve(const PPSplitting<T>& sp, const ShiftMatrix<T>& sigma, std::span<const T> b,
                              std::span<const T> u0, const StationaryConfig& cfg) {
  return PpsIteration<T>(sp, sigma, cfg.inner).solve(b, u0, cfg);
}

#define PPSOLVE_INSTANTIATE(T)                                                                                \
  template class PpsIteration<T>;                                                                             \
  template Vector<T> pps_step(const PPSplitting<T>&, const ShiftMatrix<T>&, std::span<const T>,               \
                              std::span<const T>, std::optional<InnerSolveConfig>);                            \
  template StationaryResult<T> pps_solve(const PPSplitting<T>&, const ShiftMatrix<T>&, std::span<const T>,    \
                                         std::span<const T>, const StationaryConfig&);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
