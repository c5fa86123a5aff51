#pragma once

#include <cstdint>

#include "ppsolve/splitting.hpp"

namespace ppsolve {

/// A = [W, F Omega; -F^T, N] with W of order q and N of order n - q.
struct SkewBlockProblem {
  std::size_t n = 0, q = 0;
  SparseMatrix<double> W, N, F, Omega;
  SparseMatrix<double> A;
  Vector<double> b;
};

/// round-half-up(0.9 n)
std::size_t skew_block_q(std::size_t n);

/// Problem plus the splitting P2 = [0, F Omega; -Omega^T F^T, 0],
/// P1 = A - P2. Requires n >= 10.
std::pair<SkewBlockProblem, PPSplitting<double>> gen_skew_block(std::size_t n);

/// [[0, J], [-J^T, 0]] with J the q-by-(n-q) rectangular identity.
SparseMatrix<double> block_skew_identity(std::size_t n, std::size_t q);

/// (W + iT) x = b on an m-by-m grid with p = m^2 unknowns.
struct ComplexShiftProblem {
  std::size_t m = 0, p = 0;
  double h = 0.0, tau = 0.0;
  SparseMatrix<double> K, W, T;
  Vector<complex_t> b;
  /// W + iT
  SparseMatrix<complex_t> complex_matrix() const;
  /// [W, -T; T, W] with right-hand side [Re b; Im b].
  BlockSaddleSystem<double> real_form() const;
};

ComplexShiftProblem gen_complex_shift(std::size_t m);

/// h^{-2} tridiag(-1, 2, -1) of order m.
SparseMatrix<double> laplacian_1d(std::size_t m);

/// Surrogate for discretized Oseen systems: A = tridiag(-1-c, 4, -1+c)
/// (PD, nonsymmetric), B random sparse with a few entries per column,
/// C = -B^T, D = delta I. Right-hand side A_full * ones.
BlockSaddleSystem<double> gen_oseen_surrogate(std::size_t n, std::size_t m, std::uint64_t seed,
                                              double convection = 0.5, double delta = 1e-2);

}  // namespace ppsolve
