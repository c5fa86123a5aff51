#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ppsolve/definiteness.hpp"
#include "ppsolve/sparse_matrix.hpp"

namespace ppsolve {

/// 2x2 block system [A B; C D] with A n-by-n and D m-by-m.
template <Scalar T>
struct BlockSaddleSystem {
  SparseMatrix<T> A, B, C, D;
  Vector<T> rhs;

  BlockSaddleSystem() = default;
  BlockSaddleSystem(SparseMatrix<T> a, SparseMatrix<T> b, SparseMatrix<T> c, SparseMatrix<T> d, Vector<T> f = {});

  /// Slices a square matrix at row/column n.
  static BlockSaddleSystem from_matrix(const SparseMatrix<T>& m, std::size_t n, Vector<T> f = {});

  std::size_t n() const { return A.rows(); }
  std::size_t m() const { return D.rows(); }
  std::size_t size() const { return n() + m(); }
  SparseMatrix<T> assemble() const { return block_assemble(A, B, C, D); }
};

/// A = P1 + P2 together with lazily computed definiteness certificates.
/// Copies share the certificate cache.
template <Scalar T>
class PPSplitting {
 public:
  PPSplitting(SparseMatrix<T> a, SparseMatrix<T> p1, SparseMatrix<T> p2, std::string name = "custom",
              std::optional<std::size_t> block_split = std::nullopt);

  const SparseMatrix<T>& A() const;
  const SparseMatrix<T>& P1() const;
  const SparseMatrix<T>& P2() const;
  const std::string& name() const { return name_; }
  std::size_t size() const { return A().rows(); }
  /// Row of the 2x2 block boundary for saddle-structured splittings.
  std::optional<std::size_t> block_split() const { return block_split_; }

  const DefinitenessReport& a_definiteness() const;
  const DefinitenessReport& p1_definiteness() const;
  const DefinitenessReport& p2_definiteness() const;
  bool p1_skew() const;
  bool p2_skew() const;

  /// Both parts certified PSD.
  bool certified() const;
  /// Named facts: A_PD, P1_PSD, P2_PSD, P1_PD, P2_PD, P1_HPSD, P2_HPSD,
  /// P1_skew, P2_skew.
  std::map<std::string, bool> certificates() const;

 private:
  struct Parts;
  std::shared_ptr<Parts> parts_;
  std::string name_;
  std::optional<std::size_t> block_split_;
};

template <Scalar T>
PPSplitting<T> split1_triangular(const SparseMatrix<T>& a);
template <Scalar T>
PPSplitting<T> split2_block_triangular(const BlockSaddleSystem<T>& s);
template <Scalar T>
PPSplitting<T> split3_shift(const SparseMatrix<T>& a);
/// P1 = diag(0, D), P2 = [A B; C 0].
template <Scalar T>
PPSplitting<T> saddle_split_A(const BlockSaddleSystem<T>& s);
/// P1 = diag(A, 0), P2 = [0 B; C D].
template <Scalar T>
PPSplitting<T> saddle_split_B(const BlockSaddleSystem<T>& s);
/// P1 = [A B; C 0], P2 = diag(0, D).
template <Scalar T>
PPSplitting<T> spps1_split(const BlockSaddleSystem<T>& s);
/// P1 = [0 B; C D], P2 = diag(A, 0).
template <Scalar T>
PPSplitting<T> spps2_split(const BlockSaddleSystem<T>& s);
/// P1 = (A + A^*)/2, P2 = (A - A^*)/2.
template <Scalar T>
PPSplitting<T> hss_split(const SparseMatrix<T>& a);
/// P1 + S, P2 - S for skew-Hermitian S.
template <Scalar T>
PPSplitting<T> skew_shift(const PPSplitting<T>& sp, const SparseMatrix<T>& s);

/// Dispatch on the configuration name: split1, split2, split3, saddleA,
/// saddleB, spps1, spps2, hss. Block recipes need the saddle system.
template <Scalar T>
PPSplitting<T> make_splitting(const std::string& name, const SparseMatrix<T>& a, const BlockSaddleSystem<T>* s);

/// ||A||_F / (2 ||Q||_F)
template <Scalar T>
double alpha_star(const SparseMatrix<T>& a, const SparseMatrix<T>& q);

enum class QVariant { identity, diag_hermitian, block_D_N, block_D_N_mirror, custom };

std::string_view to_string(QVariant v);
QVariant q_variant_from_string(std::string_view s);

/// Q for a plain matrix: identity or diag of the Hermitian part.
template <Scalar T>
SparseMatrix<T> build_Q(QVariant v, const SparseMatrix<T>& a);

/// Block Q with H_D = (D + D^*)/2 + eps I:
///   identity:         I
///   diag_hermitian:   diag(diag(H_A), diag(H_D))
///   block_D_N:        diag(H_A, diag(H_D))
///   block_D_N_mirror: diag(diag(H_A), H_D)
/// Throws if the result is not HPD.
template <Scalar T>
SparseMatrix<T> build_Q(QVariant v, const BlockSaddleSystem<T>& s, double eps);

/// Throws naming the first nonpositive diagonal entry, or the margin, when
/// q is not HPD.
template <Scalar T>
void require_hpd(const SparseMatrix<T>& q, const std::string& what);

}  // namespace ppsolve
