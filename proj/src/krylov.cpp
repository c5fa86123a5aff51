#include "ppsolve/krylov.hpp"

#include <chrono>
#include <cmath>

namespace ppsolve {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <Scalar T>
Vector<T> initial_guess(std::span<const T> x0, std::size_t n) {
  if (x0.empty()) return Vector<T>(n, T(0));
  require_dims(x0.size() == n, "initial guess length mismatch");
  return Vector<T>(x0.begin(), x0.end());
}

template <Scalar T>
Vector<T> residual(const LinearOperator<T>& a, std::span<const T> b, std::span<const T> x) {
  Vector<T> r = a.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

/// Rotation zeroing the second component of (f, g); see LAPACK zlartg.
template <Scalar T>
struct Givens {
  double c = 1.0;
  T s = T(0);

  static Givens make(T f, T g) {
    Givens rot;
    const double af = std::abs(f), ag = std::abs(g);
    if (ag == 0.0) return rot;
    if (af == 0.0) {
      rot.c = 0.0;
      rot.s = conj(g) / ag;
      return rot;
    }
    const double r = std::hypot(af, ag);
    rot.c = af / r;
    rot.s = (f / af) * conj(g) / r;
    return rot;
  }

  void apply(T& x, T& y) const {
    const T tx = c * x + s * y;
    y = -conj(s) * x + c * y;
    x = tx;
  }
};

}  // namespace

template <Scalar T>
KrylovResult<T> fgmres(const LinearOperator<T>& a, std::span<const T> b, const LinearOperator<T>* m_inv,
                       const KrylovConfig& cfg, std::span<const T> x0) {
  const auto t0 = Clock::now();
  const std::size_t n = a.size();
  require_dims(b.size() == n, "fgmres: rhs length mismatch");
  if (m_inv) require_dims(m_inv->size() == n, "fgmres: preconditioner size mismatch");
  if (cfg.restart == 0) throw std::invalid_argument("fgmres: restart must be >= 1");

  KrylovResult<T> out;
  out.x = initial_guess(x0, n);
  IterationReport& rep = out.report;
  Vector<T> r = residual<T>(a, b, out.x);
  const double beta0 = norm2(r);
  rep.residual_history.push_back(beta0 == 0.0 ? 0.0 : 1.0);
  if (beta0 == 0.0) {
    rep.converged = true;
    rep.termination = Termination::tol_reached;
    rep.wall_time = seconds_since(t0);
    return out;
  }

  const std::size_t m = cfg.restart;
  std::vector<Vector<T>> v(m + 1, Vector<T>(n));
  std::vector<Vector<T>> z(m_inv ? m : 0, Vector<T>(n));
  std::vector<std::vector<T>> h(m + 1, std::vector<T>(m, T(0)));
  std::vector<Givens<T>> rot(m);
  std::vector<T> g(m + 1);
  Vector<T> w(n);

  double beta = beta0;
  double true_rel = 1.0;
  while (true) {
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), T(0));
    g[0] = beta;
    std::size_t k = 0;
    bool breakdown = false;
    double rec = beta;
    while (k < m && rep.iterations < cfg.max_iters) {
      const std::size_t j = k;
      if (m_inv) {
        m_inv->apply(v[j], z[j]);
        a.apply(z[j], w);
      } else {
        a.apply(v[j], w);
      }
      for (std::size_t i = 0; i <= j; ++i) {
        h[i][j] = dot<T>(v[i], w);
        axpy<T>(-h[i][j], v[i], w);
      }
      double hn = norm2(w);
      if (hn > 0.0) {
        double loss = 0.0;
        for (std::size_t i = 0; i <= j; ++i) loss = std::max(loss, std::abs(dot<T>(v[i], w)) / hn);
        if (loss > 1e-8) {
          for (std::size_t i = 0; i <= j; ++i) {
            const T c = dot<T>(v[i], w);
            h[i][j] += c;
            axpy<T>(-c, v[i], w);
          }
          hn = norm2(w);
        }
      }
      h[j + 1][j] = hn;
      if (hn > 0.0)
        for (std::size_t i = 0; i < n; ++i) v[j + 1][i] = w[i] / hn;
      for (std::size_t i = 0; i < j; ++i) rot[i].apply(h[i][j], h[i + 1][j]);
      rot[j] = Givens<T>::make(h[j][j], h[j + 1][j]);
      rot[j].apply(h[j][j], h[j + 1][j]);
      rot[j].apply(g[j], g[j + 1]);
      ++k;
      ++rep.iterations;
      rec = std::abs(g[j + 1]);
      if (cfg.record_history) rep.residual_history.push_back(rec / beta0);
      if (rec <= cfg.rel_tol * beta0) break;
      if (hn <= 1e-14 * beta0) {
        breakdown = true;
        break;
      }
    }

    // Back substitution on the rotated Hessenberg system.
    std::vector<T> y(k);
    for (std::size_t i = k; i-- > 0;) {
      T s = g[i];
      for (std::size_t l = i + 1; l < k; ++l) s -= h[i][l] * y[l];
      y[i] = h[i][i] == T(0) ? T(0) : s / h[i][i];
    }
    for (std::size_t i = 0; i < k; ++i) axpy<T>(y[i], m_inv ? std::span<const T>(z[i]) : std::span<const T>(v[i]), out.x);

    r = residual<T>(a, b, out.x);
    const double beta_new = norm2(r);
    true_rel = beta_new / beta0;
    rep.restart_residual_gap = std::max(rep.restart_residual_gap, std::abs(beta_new - rec) / beta0);
    if (cfg.record_history && k > 0) rep.residual_history.back() = true_rel;

    if (beta_new <= cfg.rel_tol * beta0) {
      rep.converged = true;
      rep.termination = Termination::tol_reached;
      break;
    }
    if (rep.iterations >= cfg.max_iters) {
      rep.termination = Termination::max_iters;
      break;
    }
    if (breakdown || k == 0 || beta_new >= beta * (1.0 - 1e-13)) {
      rep.termination = Termination::stagnation;
      break;
    }
    beta = beta_new;
  }
  rep.final_relative_residual = true_rel;
  rep.wall_time = seconds_since(t0);
  return out;
}

template <Scalar T>
KrylovResult<T> gmres(const LinearOperator<T>& a, std::span<const T> b, const KrylovConfig& cfg,
                      std::span<const T> x0) {
  return fgmres<T>(a, b, nullptr, cfg, x0);
}

template <Scalar T>
KrylovResult<T> cg(const LinearOperator<T>& a, std::span<const T> b, const KrylovConfig& cfg,
                   std::span<const T> x0) {
  const auto t0 = Clock::now();
  const std::size_t n = a.size();
  require_dims(b.size() == n, "cg: rhs length mismatch");
  KrylovResult<T> out;
  out.x = initial_guess(x0, n);
  IterationReport& rep = out.report;
  Vector<T> r = residual<T>(a, b, out.x);
  const double r0 = norm2(r);
  rep.residual_history.push_back(r0 == 0.0 ? 0.0 : 1.0);
  double rel = r0 == 0.0 ? 0.0 : 1.0;
  if (r0 > 0.0) {
    Vector<T> p = r, ap(n);
    double rr = abs2_sum<T>(r);
    while (rep.iterations < cfg.max_iters) {
      a.apply(p, ap);
      const double curv = real_part(dot<T>(p, ap));
      if (!(curv > 0.0)) throw NonPositiveCurvature("cg: non-positive curvature p^H A p = " + std::to_string(curv));
      const T alpha = T(rr / curv);
      axpy<T>(alpha, p, out.x);
      axpy<T>(-alpha, ap, r);
      ++rep.iterations;
      const double rr_new = abs2_sum<T>(r);
      rel = std::sqrt(rr_new) / r0;
      if (cfg.record_history) rep.residual_history.push_back(rel);
      if (rel <= cfg.rel_tol) break;
      const T beta = T(rr_new / rr);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      rr = rr_new;
    }
  }
  rep.converged = rel <= cfg.rel_tol;
  rep.termination = rep.converged ? Termination::tol_reached : Termination::max_iters;
  rep.final_relative_residual = rel;
  rep.wall_time = seconds_since(t0);
  return out;
}

#define PPSOLVE_INSTANTIATE(T)                                                                                  \
  template KrylovResult<T> fgmres(const LinearOperator<T>&, std::span<const T>, const LinearOperator<T>*,      \
                                  const KrylovConfig&, std::span<const T>);                                     \
  template KrylovResult<T> gmres(const LinearOperator<T>&, std::span<const T>, const KrylovConfig&,             \
                                 std::span<const T>);                                                           \
  template KrylovResult<T> cg(const LinearOperator<T>&, std::span<const T>, const KrylovConfig&, std::span<const T>);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
