#include "ppsolve/preconditioners.hpp"

#include <mutex>

namespace ppsolve {

template <Scalar T>
struct PpsPreconditioner<T>::State {
  PPSplitting<T> sp;
  ShiftMatrix<T> sigma;
  InnerSolver<T> plus_p2, plus_p1;
};

template <Scalar T>
PpsPreconditioner<T>::PpsPreconditioner(PPSplitting<T> sp, ShiftMatrix<T> sigma, const InnerSolveConfig& inner) {
  require_dims(sigma.size() == sp.size(), "PPS preconditioner: Sigma size must match A");
  auto st = std::make_shared<State>(State{std::move(sp), std::move(sigma), {}, {}});
  SparseMatrix<T> s2 = st->sigma.sigma() + st->sp.P2();
  SparseMatrix<T> s1 = st->sigma.sigma() + st->sp.P1();
  const bool need = inner.method == InnerMethod::automatic;
  const bool h2 = need && is_hermitian_kind(st->sp.p2_definiteness().kind);
  const bool h1 = need && is_hermitian_kind(st->sp.p1_definiteness().kind);
  st->plus_p2 = InnerSolver<T>(make_operator(s2), h2, inner, "pps stage 1 (Sigma+P2)", &s2);
  st->plus_p1 = InnerSolver<T>(make_operator(s1), h1, inner, "pps stage 3 (Sigma+P1)", &s1);
  state_ = std::move(st);
}

template <Scalar T>
Vector<T> PpsPreconditioner<T>::apply(std::span<const T> v) const {
  const Vector<T> z = state_->plus_p2.solve(v);
  Vector<T> w(z.size());
  state_->sigma.apply(z, w);
  return state_->plus_p1.solve(w);
}

template <Scalar T>
LinearOperator<T> PpsPreconditioner<T>::as_operator() const {
  auto self = *this;
  return LinearOperator<T>(size(), [self](std::span<const T> x, std::span<T> y) {
    const Vector<T> r = self.apply(x);
    std::copy(r.begin(), r.end(), y.begin());
  });
}

template <Scalar T>
std::size_t PpsPreconditioner<T>::size() const {
  return state_->sp.size();
}

template <Scalar T>
std::size_t PpsPreconditioner<T>::inner_iterations() const {
  return state_->plus_p2.stats().iterations + state_->plus_p1.stats().iterations;
}

template <Scalar T>
std::size_t PpsPreconditioner<T>::inner_unconverged() const {
  return state_->plus_p2.stats().unconverged + state_->plus_p1.stats().unconverged;
}

template <Scalar T>
SppsBlocks<T> SppsBlocks<T>::from_system(const BlockSaddleSystem<T>& s) {
  SppsBlocks b;
  b.n = s.n();
  b.m = s.m();
  b.A = make_rect_operator(s.A);
  b.B = make_rect_operator(s.B);
  b.C = make_rect_operator(s.C);
  b.D = make_rect_operator(s.D);
  const double scale = std::max({frobenius_norm(s.A), frobenius_norm(s.B), frobenius_norm(s.C),
                                 frobenius_norm(s.D), 1e-300});
  const double tol = 1e-12 * scale;
  b.a_hermitian_psd = is_hermitian(s.A, tol) && is_psd(definiteness(s.A, {1e-10 * scale}).kind);
  b.d_hermitian_psd = is_hermitian(s.D, tol) && is_psd(definiteness(s.D, {1e-10 * scale}).kind);
  b.c_is_minus_b_adjoint = max_abs_difference(s.C, scaled(T(-1), s.B.adjoint())) <= tol;
  b.system = s;
  return b;
}

template <Scalar T>
struct SppsOperator<T>::State {
  SppsBlocks<T> blocks;
  ShiftMatrix<T> sigma1, sigma2;
  SppsVariant variant;
  /// A + Sigma1 (SPPS1) or D + Sigma2 (SPPS2) when the blocks are stored.
  std::optional<SparseMatrix<T>> shifted_diag_block;
  InnerSolver<T> first, schur;
  bool schur_hpd = false, first_hpd = false;
  std::optional<bool> p1_psd;
  mutable ApplyStats stats;
  LinearOperator<T> schur_op;
};

namespace {

template <Scalar T>
void shift_solve_counted(const ShiftMatrix<T>& s, std::span<const T> v, std::span<T> out, ApplyStats& st) {
  s.solve(v, out);
  if (s.is_diagonal())
    ++st.diagonal_scales;
  else
    ++st.shift_solves;
}

}  // namespace

template <Scalar T>
SppsOperator<T>::SppsOperator(SppsBlocks<T> blocks, ShiftMatrix<T> sigma1, ShiftMatrix<T> sigma2,
                              SppsVariant variant, const InnerSolveConfig& inner)
    : state_(std::make_shared<State>()) {
  State& st = *state_;
  st.blocks = std::move(blocks);
  st.sigma1 = std::move(sigma1);
  st.sigma2 = std::move(sigma2);
  st.variant = variant;
  const std::size_t n = st.blocks.n, m = st.blocks.m;
  require_dims(st.sigma1.size() == n && st.sigma2.size() == m, "SPPS: shift blocks must match A and D");
  const bool v1 = variant == SppsVariant::spps1;

  // Stage-one system: D + Sigma2 (SPPS1) or A + Sigma1 (SPPS2).
  const RectOperator<T>& stage_block = v1 ? st.blocks.D : st.blocks.A;
  const ShiftMatrix<T>& stage_shift = v1 ? st.sigma2 : st.sigma1;
  st.first_hpd = v1 ? st.blocks.d_hermitian_psd : st.blocks.a_hermitian_psd;
  // Schur complement is Hermitian PD when the kept diagonal block is HPSD and
  // C = -B^*, since then -B Sigma2^{-1} C = B Sigma2^{-1} B^* is HPSD.
  st.schur_hpd = (v1 ? st.blocks.a_hermitian_psd : st.blocks.d_hermitian_psd) && st.blocks.c_is_minus_b_adjoint;

  std::optional<SparseMatrix<T>> first_sparse;
  if (st.blocks.system) {
    const BlockSaddleSystem<T>& s = *st.blocks.system;
    first_sparse = (v1 ? s.D : s.A) + stage_shift.sigma();
    st.shifted_diag_block = (v1 ? s.A + st.sigma1.sigma() : s.D + st.sigma2.sigma());
    const PPSplitting<T> sp = v1 ? spps1_split(s) : spps2_split(s);
    st.p1_psd = is_psd(sp.p1_definiteness().kind);
  }
  const std::size_t first_n = v1 ? m : n;
  LinearOperator<T> first_op(first_n, [blk = stage_block, sh = stage_shift](std::span<const T> x, std::span<T> y) {
    blk.apply(x, y);
    Vector<T> t(x.size());
    sh.apply(x, t);
    axpy<T>(T(1), t, y);
  });
  st.first = InnerSolver<T>(first_sparse ? make_operator(*first_sparse) : first_op,
                            st.first_hpd, inner, v1 ? "spps1 step 1 (D+alpha Q2)" : "spps2 step 1 (A+alpha Q1)",
                            first_sparse ? &*first_sparse : nullptr);

  // Schur operator, counting kernel work per application.
  const std::size_t schur_n = v1 ? n : m;
  State* raw = state_.get();
  st.schur_op = LinearOperator<T>(schur_n, [raw, v1](std::span<const T> x, std::span<T> y) {
    State& s = *raw;
    ++s.stats.schur_applies;
    const RectOperator<T>& inner_from = v1 ? s.blocks.C : s.blocks.B;  // maps the kept block to the eliminated one
    const RectOperator<T>& inner_to = v1 ? s.blocks.B : s.blocks.C;
    const ShiftMatrix<T>& elim_shift = v1 ? s.sigma2 : s.sigma1;
    if (s.shifted_diag_block) {
      s.shifted_diag_block->multiply(x, y);
      ++s.stats.spmv;
    } else {
      const RectOperator<T>& kept = v1 ? s.blocks.A : s.blocks.D;
      const ShiftMatrix<T>& kept_shift = v1 ? s.sigma1 : s.sigma2;
      kept.apply(x, y);
      Vector<T> t(x.size());
      kept_shift.apply(x, t);
      axpy<T>(T(1), t, y);
      s.stats.spmv += 2;
      ++s.stats.axpy;
    }
    Vector<T> cx = inner_from.apply(x);
    ++s.stats.spmv;
    Vector<T> q(cx.size());
    shift_solve_counted(elim_shift, std::span<const T>(cx), std::span<T>(q), s.stats);
    const Vector<T> bq = inner_to.apply(q);
    ++s.stats.spmv;
    axpy<T>(T(-1), bq, y);
    ++s.stats.axpy;
  });
  st.schur = InnerSolver<T>(st.schur_op, st.schur_hpd, inner,
                            v1 ? "spps1 step 3 (Schur S1)" : "spps2 step 3 (Schur S2)");
  st.stats.reset();
}

template <Scalar T>
Vector<T> SppsOperator<T>::apply(std::span<const T> x) const {
  State& s = *state_;
  const std::size_t n = s.blocks.n, m = s.blocks.m;
  require_dims(x.size() == n + m, "SPPS apply: length mismatch");
  ++s.stats.applies;
  Vector<T> y(n + m);
  if (s.variant == SppsVariant::spps1) {
    const std::span<const T> x1 = x.subspan(0, n), x2 = x.subspan(n, m);
    const Vector<T> v2 = s.first.solve(x2);
    Vector<T> v1(x1.begin(), x1.end());
    axpy<T>(T(-1), s.blocks.B.apply(v2), v1);
    const Vector<T> y1 = s.schur.solve(v1);
    const Vector<T> cy = s.blocks.C.apply(y1);
    Vector<T> t(m);
    s.sigma2.solve(cy, t);
    std::copy(y1.begin(), y1.end(), y.begin());
    for (std::size_t i = 0; i < m; ++i) y[n + i] = v2[i] - t[i];
  } else {
    const std::span<const T> x1 = x.subspan(0, n), x2 = x.subspan(n, m);
    const Vector<T> v1 = s.first.solve(x1);
    Vector<T> v2(x2.begin(), x2.end());
    axpy<T>(T(-1), s.blocks.C.apply(v1), v2);
    const Vector<T> y2 = s.schur.solve(v2);
    const Vector<T> by = s.blocks.B.apply(y2);
    Vector<T> t(n);
    s.sigma1.solve(by, t);
    for (std::size_t i = 0; i < n; ++i) y[i] = v1[i] - t[i];
    std::copy(y2.begin(), y2.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return y;
}

template <Scalar T>
LinearOperator<T> SppsOperator<T>::as_operator() const {
  auto self = *this;
  return LinearOperator<T>(size(), [self](std::span<const T> x, std::span<T> y) {
    const Vector<T> r = self.apply(x);
    std::copy(r.begin(), r.end(), y.begin());
  });
}

template <Scalar T>
LinearOperator<T> SppsOperator<T>::schur_operator() const {
  auto keep = state_;
  const LinearOperator<T>& op = state_->schur_op;
  return LinearOperator<T>(op.size(), [keep](std::span<const T> x, std::span<T> y) { keep->schur_op.apply(x, y); });
}

template <Scalar T>
SppsVariant SppsOperator<T>::variant() const {
  return state_->variant;
}
template <Scalar T>
std::size_t SppsOperator<T>::size() const {
  return state_->blocks.n + state_->blocks.m;
}
template <Scalar T>
bool SppsOperator<T>::schur_certified_hpd() const {
  return state_->schur_hpd;
}
template <Scalar T>
bool SppsOperator<T>::first_stage_certified_hpd() const {
  return state_->first_hpd;
}
template <Scalar T>
std::optional<bool> SppsOperator<T>::p1_certified_psd() const {
  return state_->p1_psd;
}
template <Scalar T>
const ApplyStats& SppsOperator<T>::stats() const {
  return state_->stats;
}
template <Scalar T>
std::size_t SppsOperator<T>::inner_iterations() const {
  return state_->first.stats().iterations + state_->schur.stats().iterations;
}
template <Scalar T>
std::size_t SppsOperator<T>::inner_unconverged() const {
  return state_->first.stats().unconverged + state_->schur.stats().unconverged;
}

template <Scalar T>
std::pair<ShiftMatrix<T>, ShiftMatrix<T>> split_shift(const SparseMatrix<T>& q, double alpha, std::size_t n) {
  require_dims(q.is_square() && n <= q.rows(), "split_shift: bad block size");
  const std::size_t m = q.rows() - n;
  if (submatrix(q, 0, n, n, m).pruned().nnz() != 0 || submatrix(q, n, 0, m, n).pruned().nnz() != 0)
    throw std::invalid_argument("split_shift: Q must be block diagonal");
  return {ShiftMatrix<T>(submatrix(q, 0, 0, n, n), alpha), ShiftMatrix<T>(submatrix(q, n, n, m, m), alpha)};
}

#define PPSOLVE_INSTANTIATE(T)           \
  template class PpsPreconditioner<T>;   \
  template struct SppsBlocks<T>;         \
  template class SppsOperator<T>;        \
  template std::pair<ShiftMatrix<T>, ShiftMatrix<T>> split_shift(const SparseMatrix<T>&, double, std::size_t);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
