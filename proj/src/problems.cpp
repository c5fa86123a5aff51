#include "ppsolve/problems.hpp"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace ppsolve {

namespace {

SparseMatrix<double> tridiag_shifted(std::size_t n, double lo, double diag0, double up) {
  // diagonal entry k (1-based) is k + diag0
  std::vector<Triplet<double>> t;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<index_t>(k);
    t.push_back({i, i, static_cast<double>(k + 1) + diag0});
    if (k > 0) t.push_back({i, i - 1, lo});
    if (k + 1 < n) t.push_back({i, i + 1, up});
  }
  return SparseMatrix<double>::from_triplets(n, n, std::move(t));
}

}  // namespace

std::size_t skew_block_q(std::size_t n) { return (9 * n + 5) / 10; }

std::pair<SkewBlockProblem, PPSplitting<double>> gen_skew_block(std::size_t n) {
  if (n < 10) throw std::invalid_argument("gen_skew_block: n must be at least 10");
  SkewBlockProblem pr;
  pr.n = n;
  pr.q = skew_block_q(n);
  const std::size_t q = pr.q, r = n - q;
  pr.W = tridiag_shifted(q, 1.0, 1.0, 1.0);
  pr.N = tridiag_shifted(r, 1.0, 1.0, 1.0);

  // f_{k,j} = j at k = j + 2q - n, 1-based, k in [1, q], j in [1, n-q]
  std::vector<Triplet<double>> ft;
  for (std::size_t j = 1; j <= r; ++j) {
    const long long k = static_cast<long long>(j) + 2 * static_cast<long long>(q) - static_cast<long long>(n);
    if (k >= 1 && k <= static_cast<long long>(q))
      ft.push_back({static_cast<index_t>(k - 1), static_cast<index_t>(j - 1), static_cast<double>(j)});
  }
  pr.F = SparseMatrix<double>::from_triplets(q, r, std::move(ft));
  std::vector<double> om(r);
  for (std::size_t k = 0; k < r; ++k) om[k] = 1.0 / static_cast<double>(k + 1);
  pr.Omega = SparseMatrix<double>::diagonal(om);

  SparseMatrix<double> fo = pr.F;
  {
    std::vector<Triplet<double>> t;
    for (std::size_t i = 0; i < q; ++i)
      for (index_t k = pr.F.row_ptr()[i]; k < pr.F.row_ptr()[i + 1]; ++k) {
        const index_t j = pr.F.col_idx()[k];
        t.push_back({static_cast<index_t>(i), j, pr.F.values()[k] * om[static_cast<std::size_t>(j)]});
      }
    fo = SparseMatrix<double>::from_triplets(q, r, std::move(t));
  }
  const SparseMatrix<double> zq = SparseMatrix<double>::zeros(q, q), zr = SparseMatrix<double>::zeros(r, r);
  pr.A = block_assemble(pr.W, fo, scaled(-1.0, pr.F.transpose()), pr.N);
  const SparseMatrix<double> p2 = block_assemble(zq, fo, scaled(-1.0, fo.transpose()), zr);
  const SparseMatrix<double> p1 = (pr.A - p2).pruned();
  pr.b = pr.A.multiply(Vector<double>(n, 1.0));
  PPSplitting<double> sp(pr.A, p1, p2, "skew_block", q);
  return {std::move(pr), std::move(sp)};
}

SparseMatrix<double> block_skew_identity(std::size_t n, std::size_t q) {
  require_dims(q <= n, "block_skew_identity: q exceeds n");
  const std::size_t r = n - q;
  std::vector<Triplet<double>> t;
  for (std::size_t k = 0; k < std::min(q, r); ++k) {
    t.push_back({static_cast<index_t>(k), static_cast<index_t>(q + k), 1.0});
    t.push_back({static_cast<index_t>(q + k), static_cast<index_t>(k), -1.0});
  }
  return SparseMatrix<double>::from_triplets(n, n, std::move(t));
}

SparseMatrix<double> laplacian_1d(std::size_t m) {
  const double h = 1.0 / static_cast<double>(m + 1);
  const double s = 1.0 / (h * h);
  std::vector<Triplet<double>> t;
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<index_t>(k);
    t.push_back({i, i, 2.0 * s});
    if (k > 0) t.push_back({i, i - 1, -s});
    if (k + 1 < m) t.push_back({i, i + 1, -s});
  }
  return SparseMatrix<double>::from_triplets(m, m, std::move(t));
}

ComplexShiftProblem gen_complex_shift(std::size_t m) {
  if (m < 2) throw std::invalid_argument("gen_complex_shift: m must be at least 2");
  ComplexShiftProblem pr;
  pr.m = m;
  pr.p = m * m;
  pr.h = 1.0 / static_cast<double>(m + 1);
  pr.tau = pr.h;
  const SparseMatrix<double> v = laplacian_1d(m), im = SparseMatrix<double>::identity(m);
  pr.K = kron(im, v) + kron(v, im);
  const SparseMatrix<double> ip = SparseMatrix<double>::identity(pr.p);
  const double s3 = std::sqrt(3.0);
  pr.W = linear_combination(1.0, pr.K, (3.0 - s3) / pr.tau, ip);
  pr.T = linear_combination(1.0, pr.K, (3.0 + s3) / pr.tau, ip);
  pr.b.resize(pr.p);
  for (std::size_t j = 1; j <= pr.p; ++j) {
    const double jd = static_cast<double>(j);
    pr.b[j - 1] = complex_t(1.0, -1.0) * jd / (pr.tau * (jd + 1.0) * (jd + 1.0));
  }
  return pr;
}

SparseMatrix<complex_t> ComplexShiftProblem::complex_matrix() const {
  return linear_combination(complex_t(1.0), to_complex(W), complex_t(0.0, 1.0), to_complex(T));
}

BlockSaddleSystem<double> ComplexShiftProblem::real_form() const {
  Vector<double> f(2 * p);
  for (std::size_t j = 0; j < p; ++j) {
    f[j] = b[j].real();
    f[p + j] = b[j].imag();
  }
  return BlockSaddleSystem<double>(W, scaled(-1.0, T), T, W, std::move(f));
}

BlockSaddleSystem<double> gen_oseen_surrogate(std::size_t n, std::size_t m, std::uint64_t seed, double convection,
                                              double delta) {
  if (n < 2 || m < 1 || m > n) throw std::invalid_argument("gen_oseen_surrogate: need 2 <= n and 1 <= m <= n");
  if (delta < 0.0) throw std::invalid_argument("gen_oseen_surrogate: delta must be nonnegative");
  std::vector<Triplet<double>> at;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<index_t>(k);
    at.push_back({i, i, 4.0});
    if (k > 0) at.push_back({i, i - 1, -1.0 - convection});
    if (k + 1 < n) at.push_back({i, i + 1, -1.0 + convection});
  }
  SparseMatrix<double> a = SparseMatrix<double>::from_triplets(n, n, std::move(at));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> row(0, n - 1);
  std::normal_distribution<double> val;
  std::vector<Triplet<double>> bt;
  for (std::size_t j = 0; j < m; ++j) {
    // a guaranteed entry keeps B full column rank in practice
    std::set<std::size_t> rows{(j * n) / m};
    while (rows.size() < std::min<std::size_t>(3, n)) rows.insert(row(rng));
    for (std::size_t i : rows) bt.push_back({static_cast<index_t>(i), static_cast<index_t>(j), val(rng)});
  }
  SparseMatrix<double> b = SparseMatrix<double>::from_triplets(n, m, std::move(bt));
  SparseMatrix<double> c = scaled(-1.0, b.transpose());
  SparseMatrix<double> d = scaled(delta, SparseMatrix<double>::identity(m));
  BlockSaddleSystem<double> s(std::move(a), std::move(b), std::move(c), std::move(d));
  s.rhs = s.assemble().multiply(Vector<double>(n + m, 1.0));
  return s;
}

}  // namespace ppsolve
