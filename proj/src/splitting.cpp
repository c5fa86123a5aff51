#include "ppsolve/splitting.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

namespace ppsolve {

template <Scalar T>
BlockSaddleSystem<T>::BlockSaddleSystem(SparseMatrix<T> a, SparseMatrix<T> b, SparseMatrix<T> c,
                                        SparseMatrix<T> d, Vector<T> f)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)), rhs(std::move(f)) {
  require_dims(A.is_square() && D.is_square(), "saddle system: diagonal blocks must be square");
  require_dims(B.rows() == A.rows() && B.cols() == D.rows(), "saddle system: B must be n x m");
  require_dims(C.rows() == D.rows() && C.cols() == A.rows(), "saddle system: C must be m x n");
  require_dims(rhs.empty() || rhs.size() == size(), "saddle system: rhs length must be n + m");
}

template <Scalar T>
BlockSaddleSystem<T> BlockSaddleSystem<T>::from_matrix(const SparseMatrix<T>& mat, std::size_t n, Vector<T> f) {
  require_dims(mat.is_square() && n <= mat.rows(), "saddle system: bad block size");
  const std::size_t m = mat.rows() - n;
  return BlockSaddleSystem(submatrix(mat, 0, 0, n, n), submatrix(mat, 0, n, n, m), submatrix(mat, n, 0, m, n),
                           submatrix(mat, n, n, m, m), std::move(f));
}

template <Scalar T>
struct PPSplitting<T>::Parts {
  SparseMatrix<T> a, p1, p2;
  mutable std::once_flag a_once, p1_once, p2_once, skew_once;
  mutable DefinitenessReport a_def, p1_def, p2_def;
  mutable bool p1_skew = false, p2_skew = false;
};

template <Scalar T>
const SparseMatrix<T>& PPSplitting<T>::A() const {
  return parts_->a;
}
template <Scalar T>
const SparseMatrix<T>& PPSplitting<T>::P1() const {
  return parts_->p1;
}
template <Scalar T>
const SparseMatrix<T>& PPSplitting<T>::P2() const {
  return parts_->p2;
}

template <Scalar T>
PPSplitting<T>::PPSplitting(SparseMatrix<T> a, SparseMatrix<T> p1, SparseMatrix<T> p2, std::string name,
                            std::optional<std::size_t> block_split)
    : parts_(std::make_shared<Parts>()), name_(std::move(name)), block_split_(block_split) {
  require_dims(a.is_square(), "splitting: A must be square");
  require_dims(p1.rows() == a.rows() && p1.cols() == a.cols() && p2.rows() == a.rows() && p2.cols() == a.cols(),
               "splitting: P1, P2 must match A in shape");
  const double gap = max_abs_difference(a, p1 + p2);
  if (gap > 1e-12 * std::max(frobenius_norm(a), 1.0)) {
    std::ostringstream msg;
    msg << "splitting '" << name_ << "': A != P1 + P2 (max deviation " << gap << ")";
    throw std::invalid_argument(msg.str());
  }
  parts_->a = std::move(a);
  parts_->p1 = std::move(p1);
  parts_->p2 = std::move(p2);
}

template <Scalar T>
const DefinitenessReport& PPSplitting<T>::a_definiteness() const {
  std::call_once(parts_->a_once, [&] { parts_->a_def = definiteness(parts_->a); });
  return parts_->a_def;
}

template <Scalar T>
const DefinitenessReport& PPSplitting<T>::p1_definiteness() const {
  // Tolerances are scaled by ||A||_F so that a zero part is PSD, not indefinite.
  std::call_once(parts_->p1_once, [&] {
    parts_->p1_def = definiteness(parts_->p1, {1e-10 * std::max(frobenius_norm(parts_->a), 1e-300)});
  });
  return parts_->p1_def;
}

template <Scalar T>
const DefinitenessReport& PPSplitting<T>::p2_definiteness() const {
  std::call_once(parts_->p2_once, [&] {
    parts_->p2_def = definiteness(parts_->p2, {1e-10 * std::max(frobenius_norm(parts_->a), 1e-300)});
  });
  return parts_->p2_def;
}

template <Scalar T>
bool PPSplitting<T>::p1_skew() const {
  std::call_once(parts_->skew_once, [&] {
    const double tol = 1e-12 * std::max(frobenius_norm(parts_->a), 1e-300);
    parts_->p1_skew = is_skew_hermitian(parts_->p1, tol);
    parts_->p2_skew = is_skew_hermitian(parts_->p2, tol);
  });
  return parts_->p1_skew;
}

template <Scalar T>
bool PPSplitting<T>::p2_skew() const {
  p1_skew();
  return parts_->p2_skew;
}

template <Scalar T>
bool PPSplitting<T>::certified() const {
  return is_psd(p1_definiteness().kind) && is_psd(p2_definiteness().kind);
}

template <Scalar T>
std::map<std::string, bool> PPSplitting<T>::certificates() const {
  const auto& d1 = p1_definiteness();
  const auto& d2 = p2_definiteness();
  return {
      {"A_PD", is_pd(a_definiteness().kind)},
      {"P1_PSD", is_psd(d1.kind)},
      {"P2_PSD", is_psd(d2.kind)},
      {"P1_PD", is_pd(d1.kind)},
      {"P2_PD", is_pd(d2.kind)},
      {"P1_HPSD", is_hermitian_kind(d1.kind)},
      {"P2_HPSD", is_hermitian_kind(d2.kind)},
      {"P1_skew", p1_skew()},
      {"P2_skew", p2_skew()},
  };
}

template <Scalar T>
PPSplitting<T> split1_triangular(const SparseMatrix<T>& a) {
  require_dims(a.is_square(), "split1: matrix must be square");
  const SparseMatrix<T> l = strictly_lower(a), u = strictly_upper(a), d = diagonal_part(a);
  const SparseMatrix<T> ustar = u.adjoint();
  return PPSplitting<T>(a, d + l + ustar, u - ustar, "split1");
}

template <Scalar T>
PPSplitting<T> split2_block_triangular(const BlockSaddleSystem<T>& s) {
  const std::size_t n = s.n(), m = s.m();
  const auto zn = SparseMatrix<T>::zeros(n, n), zm = SparseMatrix<T>::zeros(m, m);
  const auto znm = SparseMatrix<T>::zeros(n, m), zmn = SparseMatrix<T>::zeros(m, n);
  const SparseMatrix<T> bd = block_assemble(s.A, znm, zmn, s.D);
  const SparseMatrix<T> bl = block_assemble(zn, znm, s.C, zm);
  const SparseMatrix<T> bu = block_assemble(zn, s.B, zmn, zm);
  const SparseMatrix<T> bu_star = bu.adjoint();
  return PPSplitting<T>(s.assemble(), bd + bl + bu_star, bu - bu_star, "split2", n);
}

template <Scalar T>
PPSplitting<T> split3_shift(const SparseMatrix<T>& a) {
  require_dims(a.is_square(), "split3: matrix must be square");
  return PPSplitting<T>(a, a, SparseMatrix<T>::zeros(a.rows(), a.cols()), "split3");
}

namespace {

template <Scalar T>
std::pair<SparseMatrix<T>, SparseMatrix<T>> block_pair(const BlockSaddleSystem<T>& s, bool a_in_first,
                                                        bool offdiag_in_first, bool d_in_first) {
  const std::size_t n = s.n(), m = s.m();
  const auto zn = SparseMatrix<T>::zeros(n, n), zm = SparseMatrix<T>::zeros(m, m);
  const auto znm = SparseMatrix<T>::zeros(n, m), zmn = SparseMatrix<T>::zeros(m, n);
  SparseMatrix<T> first = block_assemble(a_in_first ? s.A : zn, offdiag_in_first ? s.B : znm,
                                         offdiag_in_first ? s.C : zmn, d_in_first ? s.D : zm);
  SparseMatrix<T> second = block_assemble(a_in_first ? zn : s.A, offdiag_in_first ? znm : s.B,
                                          offdiag_in_first ? zmn : s.C, d_in_first ? zm : s.D);
  return {std::move(first), std::move(second)};
}

}  // namespace

template <Scalar T>
PPSplitting<T> saddle_split_A(const BlockSaddleSystem<T>& s) {
  auto [p1, p2] = block_pair(s, false, false, true);
  return PPSplitting<T>(s.assemble(), std::move(p1), std::move(p2), "saddleA", s.n());
}

template <Scalar T>
PPSplitting<T> saddle_split_B(const BlockSaddleSystem<T>& s) {
  auto [p1, p2] = block_pair(s, true, false, false);
  return PPSplitting<T>(s.assemble(), std::move(p1), std::move(p2), "saddleB", s.n());
}

template <Scalar T>
PPSplitting<T> spps1_split(const BlockSaddleSystem<T>& s) {
  auto [p1, p2] = block_pair(s, true, true, false);
  return PPSplitting<T>(s.assemble(), std::move(p1), std::move(p2), "spps1", s.n());
}

template <Scalar T>
PPSplitting<T> spps2_split(const BlockSaddleSystem<T>& s) {
  auto [p1, p2] = block_pair(s, false, true, true);
  return PPSplitting<T>(s.assemble(), std::move(p1), std::move(p2), "spps2", s.n());
}

template <Scalar T>
PPSplitting<T> hss_split(const SparseMatrix<T>& a) {
  SparseMatrix<T> h = hermitian_part(a);
  SparseMatrix<T> s = a - h;
  return PPSplitting<T>(a, std::move(h), std::move(s), "hss");
}

template <Scalar T>
PPSplitting<T> skew_shift(const PPSplitting<T>& sp, const SparseMatrix<T>& s) {
  require_dims(s.rows() == sp.size() && s.cols() == sp.size(), "skew_shift: S must match A in shape");
  if (!is_skew_hermitian(s, 1e-12 * std::max(frobenius_norm(s), 1.0)))
    throw std::invalid_argument("skew_shift: S is not skew-Hermitian");
  return PPSplitting<T>(sp.A(), sp.P1() + s, sp.P2() - s, sp.name() + "+skew_shift", sp.block_split());
}

template <Scalar T>
PPSplitting<T> make_splitting(const std::string& name, const SparseMatrix<T>& a, const BlockSaddleSystem<T>* s) {
  if (name == "split1") return split1_triangular(a);
  if (name == "split3") return split3_shift(a);
  if (name == "hss") return hss_split(a);
  const bool block = name == "split2" || name == "saddleA" || name == "saddleB" || name == "spps1" || name == "spps2";
  if (!block)
    throw std::invalid_argument("unknown splitting '" + name +
                                "' (valid: split1, split2, split3, saddleA, saddleB, spps1, spps2, hss)");
  if (!s) throw std::invalid_argument("splitting '" + name + "' needs a 2x2 block system");
  if (name == "split2") return split2_block_triangular(*s);
  if (name == "saddleA") return saddle_split_A(*s);
  if (name == "saddleB") return saddle_split_B(*s);
  if (name == "spps1") return spps1_split(*s);
  return spps2_split(*s);
}

template <Scalar T>
double alpha_star(const SparseMatrix<T>& a, const SparseMatrix<T>& q) {
  const double nq = frobenius_norm(q);
  if (nq == 0.0) throw std::invalid_argument("alpha_star: Q is zero");
  return frobenius_norm(a) / (2.0 * nq);
}

std::string_view to_string(QVariant v) {
  switch (v) {
    case QVariant::identity: return "identity";
    case QVariant::diag_hermitian: return "D_A";
    case QVariant::block_D_N: return "D_N";
    case QVariant::block_D_N_mirror: return "D_N_mirror";
    case QVariant::custom: return "custom";
  }
  return "custom";
}

QVariant q_variant_from_string(std::string_view s) {
  if (s == "identity" || s == "I") return QVariant::identity;
  if (s == "D_A" || s == "diag_hermitian") return QVariant::diag_hermitian;
  if (s == "D_N" || s == "block_D_N") return QVariant::block_D_N;
  if (s == "D_N_mirror" || s == "block_D_N_mirror") return QVariant::block_D_N_mirror;
  if (s == "custom") return QVariant::custom;
  throw std::invalid_argument("unknown Q variant '" + std::string(s) +
                              "' (valid: identity, D_A, D_N, D_N_mirror, custom)");
}

template <Scalar T>
void require_hpd(const SparseMatrix<T>& q, const std::string& what) {
  const Vector<T> d = q.diagonal_values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(real_part(d[i]) > 0.0)) {
      std::ostringstream msg;
      msg << what << ": not HPD, diagonal entry " << i << " is " << real_part(d[i]);
      throw std::invalid_argument(msg.str());
    }
  }
  const DefinitenessReport rep = definiteness(q);
  if (rep.kind != Definiteness::hpd) {
    std::ostringstream msg;
    msg << what << ": not HPD (" << to_string(rep.kind) << ", lambda_min " << rep.lambda_min << ")";
    throw std::invalid_argument(msg.str());
  }
}

template <Scalar T>
SparseMatrix<T> build_Q(QVariant v, const SparseMatrix<T>& a) {
  switch (v) {
    case QVariant::identity: return SparseMatrix<T>::identity(a.rows());
    case QVariant::diag_hermitian: {
      SparseMatrix<T> q = diagonal_part(hermitian_part(a));
      require_hpd(q, "Q = diag(H)");
      return q;
    }
    default: throw std::invalid_argument("build_Q: variant " + std::string(to_string(v)) + " needs block structure");
  }
}

template <Scalar T>
SparseMatrix<T> build_Q(QVariant v, const BlockSaddleSystem<T>& s, double eps) {
  const std::size_t n = s.n(), m = s.m();
  if (v == QVariant::identity) return SparseMatrix<T>::identity(n + m);
  if (v == QVariant::custom) throw std::invalid_argument("build_Q: custom Q must be supplied directly");
  const SparseMatrix<T> ha = hermitian_part(s.A);
  const SparseMatrix<T> hd = hermitian_part(s.D) + scaled(T(eps), SparseMatrix<T>::identity(m));
  const SparseMatrix<T> q1 = v == QVariant::block_D_N ? ha : diagonal_part(ha);
  const SparseMatrix<T> q2 = v == QVariant::block_D_N_mirror ? hd : diagonal_part(hd);
  SparseMatrix<T> q =
      block_assemble(q1, SparseMatrix<T>::zeros(n, m), SparseMatrix<T>::zeros(m, n), q2).pruned(0.0);
  require_hpd(q, "Q = " + std::string(to_string(v)));
  return q;
}

#define PPSOLVE_INSTANTIATE(T)                                                                   \
  template struct BlockSaddleSystem<T>;                                                          \
  template class PPSplitting<T>;                                                                 \
  template PPSplitting<T> split1_triangular(const SparseMatrix<T>&);                             \
  template PPSplitting<T> split2_block_triangular(const BlockSaddleSystem<T>&);                  \
  template PPSplitting<T> split3_shift(const SparseMatrix<T>&);                                  \
  template PPSplitting<T> saddle_split_A(const BlockSaddleSystem<T>&);                           \
  template PPSplitting<T> saddle_split_B(const BlockSaddleSystem<T>&);                           \
  template PPSplitting<T> spps1_split(const BlockSaddleSystem<T>&);                              \
  template PPSplitting<T> spps2_split(const BlockSaddleSystem<T>&);                              \
  template PPSplitting<T> hss_split(const SparseMatrix<T>&);                                     \
  template PPSplitting<T> skew_shift(const PPSplitting<T>&, const SparseMatrix<T>&);             \
  template PPSplitting<T> make_splitting(const std::string&, const SparseMatrix<T>&,             \
                                         const BlockSaddleSystem<T>*);                           \
  template double alpha_star(const SparseMatrix<T>&, const SparseMatrix<T>&);                    \
  template SparseMatrix<T> build_Q(QVariant, const SparseMatrix<T>&);                            \
  template SparseMatrix<T> build_Q(QVariant, const BlockSaddleSystem<T>&, double);               \
  template void require_hpd(const SparseMatrix<T>&, const std::string&);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
