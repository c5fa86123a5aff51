#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ppsolve/definiteness.hpp"
#include "ppsolve/kernels.hpp"
#include "ppsolve/linear_operator.hpp"
#include "ppsolve/matrix_market.hpp"
#include "support/oracles.hpp"

using namespace ppsolve;

namespace {

SparseMatrix<double> tridiag(std::size_t n) {
  std::vector<Triplet<double>> t;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<index_t>(i);
    t.push_back({k, k, 2.0});
    if (i > 0) t.push_back({k, k - 1, -1.0});
    if (i + 1 < n) t.push_back({k, k + 1, -1.0});
  }
  return SparseMatrix<double>::from_triplets(n, n, t);
}

template <Scalar T>
SparseMatrix<T> random_sparse(std::size_t r, std::size_t c, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Triplet<T>> t;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (u(rng) < density) t.push_back({static_cast<index_t>(i), static_cast<index_t>(j), oracle::draw<T>(rng)});
  return SparseMatrix<T>::from_triplets(r, c, t);
}

struct IsaGuard {
  kernels::Isa saved = kernels::active_isa();
  ~IsaGuard() { kernels::set_isa(saved); }
};

}  // namespace

TEST_CASE("csr construction validates structure") {
  CHECK_THROWS(SparseMatrix<double>(2, 2, {0, 1}, {0}, {1.0}));                  // row_ptr too short
  CHECK_THROWS(SparseMatrix<double>(2, 2, {0, 2, 2}, {1, 0}, {1.0, 2.0}));       // unsorted columns
  CHECK_THROWS(SparseMatrix<double>(2, 2, {0, 1, 2}, {0, 2}, {1.0, 2.0}));       // column out of range
  CHECK_THROWS(SparseMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}));
  const SparseMatrix<double> m(2, 3, {0, 2, 3}, {0, 2, 1}, {1.0, 2.0, 3.0});
  CHECK(m.nnz() == 3);
  CHECK(m.at(0, 2) == 2.0);
  CHECK(m.at(1, 0) == 0.0);
}

TEST_CASE("spmv small cases") {
  const Vector<double> x{1.0, 2.0, 3.0};
  CHECK(spmv(SparseMatrix<double>::identity(3), std::span<const double>(x)) == x);
  const Vector<double> ones{1.0, 1.0, 1.0};
  CHECK(spmv(tridiag(3), std::span<const double>(ones)) == Vector<double>{1.0, 0.0, 1.0});
  CHECK_THROWS_AS(spmv(tridiag(3), std::span<const double>(Vector<double>{1.0, 2.0})), DimensionError);
}

TEST_CASE_TEMPLATE("spmv matches dense multiply", T, double, complex_t) {
  std::mt19937_64 rng(1);
  for (std::size_t n : {1u, 8u, 17u, 64u}) {
    const SparseMatrix<T> m = random_sparse<T>(n, n, 0.3, rng);
    const Vector<T> x = random_vector<T>(n, rng);
    const Vector<T> y = m.multiply(x);
    const auto ref = (to_dense(m) * Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(x.data(), n)).eval();
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(y[i] - ref(i)));
    CHECK(err <= 1e-13 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("scalar and AVX2 kernels agree") {
  if (!kernels::avx2_available()) {
    MESSAGE("AVX2 not available; only the scalar path is exercised");
    return;
  }
  IsaGuard guard;
  std::mt19937_64 rng(2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1000u}) {
    const Vector<double> x = random_vector<double>(n, rng), y = random_vector<double>(n, rng);
    const double d1 = kernels::scalar::dot(x.data(), y.data(), n), d2 = kernels::avx2::dot(x.data(), y.data(), n);
    CHECK(std::abs(d1 - d2) <= 1e-13 * (1.0 + std::abs(d1)) * std::sqrt(double(n) + 1));
    const double s1 = kernels::scalar::squared_norm(x.data(), n), s2 = kernels::avx2::squared_norm(x.data(), n);
    CHECK(std::abs(s1 - s2) <= 1e-13 * (1.0 + s1));
    Vector<double> a1 = y, a2 = y;
    kernels::scalar::axpy(0.75, x.data(), a1.data(), n);
    kernels::avx2::axpy(0.75, x.data(), a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a1[i] - a2[i]) <= 1e-15 * (1.0 + std::abs(a1[i])));
    kernels::scalar::scale(-1.5, a1.data(), n);
    kernels::avx2::scale(-1.5, a2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a1[i] - a2[i]) <= 1e-15 * (1.0 + std::abs(a1[i])));
  }
  for (std::size_t n : {5u, 40u, 300u}) {
    const SparseMatrix<double> m = random_sparse<double>(n, n, 0.2, rng);
    const Vector<double> x = random_vector<double>(n, rng);
    Vector<double> y1(n), y2(n);
    kernels::scalar::spmv_csr(n, m.row_ptr().data(), m.col_idx().data(), m.values().data(), x.data(), y1.data());
    kernels::avx2::spmv_csr(n, m.row_ptr().data(), m.col_idx().data(), m.values().data(), x.data(), y2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-13 * (1.0 + std::abs(y1[i])));
  }
  // dispatch switches cleanly
  kernels::set_isa(kernels::Isa::scalar);
  CHECK(kernels::active_isa() == kernels::Isa::scalar);
  kernels::set_isa(kernels::Isa::avx2);
  CHECK(kernels::active_isa() == kernels::Isa::avx2);
}

TEST_CASE_TEMPLATE("hermitian and skew parts", T, double, complex_t) {
  const SparseMatrix<double> rot = SparseMatrix<double>::from_triplets(2, 2, {{0, 1, -1.0}, {1, 0, 1.0}});
  CHECK(frobenius_norm(hermitian_part(rot)) == 0.0);
  CHECK(max_abs_difference(hermitian_part(tridiag(4)), tridiag(4)) == 0.0);
  std::mt19937_64 rng(3);
  const SparseMatrix<T> m = random_sparse<T>(6, 6, 0.5, rng);
  const SparseMatrix<T> h = hermitian_part(m), s = skew_part(m);
  const DenseMatrix<T> d = to_dense(m);
  CHECK((to_dense(h) - DenseMatrix<T>((d + d.adjoint()) / 2.0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(max_abs_difference(h + s, m) <= 1e-15);
  CHECK(is_hermitian(h));
  CHECK(is_skew_hermitian(s));
  CHECK_THROWS(hermitian_part(SparseMatrix<T>::zeros(2, 3)));
}

TEST_CASE("frobenius norm") {
  CHECK(frobenius_norm(SparseMatrix<double>::identity(9)) == doctest::Approx(3.0));
  CHECK(frobenius_norm(SparseMatrix<double>::from_triplets(2, 2, {{0, 0, 3.0}, {0, 1, 4.0}})) == 5.0);
  std::mt19937_64 rng(4);
  const SparseMatrix<complex_t> m = random_sparse<complex_t>(7, 5, 0.5, rng);
  const complex_t k(-1.7, 0.4);
  CHECK(std::abs(frobenius_norm(scaled(k, m)) - std::abs(k) * frobenius_norm(m)) <=
        1e-13 * frobenius_norm(scaled(k, m)));
}

TEST_CASE("definiteness classification") {
  const SparseMatrix<double> rot = SparseMatrix<double>::from_triplets(2, 2, {{0, 1, -1.0}, {1, 0, 1.0}});
  CHECK(definiteness(rot).kind == Definiteness::psd);
  CHECK(definiteness(tridiag(10)).kind == Definiteness::hpd);
  CHECK(definiteness(scaled(-1.0, tridiag(4))).kind == Definiteness::indefinite);
  CHECK(definiteness(SparseMatrix<double>::diagonal(Vector<double>{1.0, 0.0})).kind == Definiteness::hpsd);
  const SparseMatrix<double> pd = SparseMatrix<double>::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 5.0}, {1, 1, 1.0}});
  CHECK(definiteness(pd).kind == Definiteness::indefinite);  // Hermitian part has eigenvalue 1 - 2.5
  const SparseMatrix<double> pd2 = SparseMatrix<double>::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 2.0}});
  CHECK(definiteness(pd2).kind == Definiteness::pd);
  DefinitenessOptions o;
  o.dense_cap = 3;
  o.force_dense = true;
  CHECK_THROWS_AS(definiteness(tridiag(10), o), SizeCapError);
  o.force_dense = false;
  const DefinitenessReport r = definiteness(tridiag(10), o);
  CHECK(r.kind == Definiteness::hpd);
  CHECK(r.method == "cholesky");
  CHECK_THROWS(definiteness(SparseMatrix<double>::zeros(2, 3)));
}

TEST_CASE("linear operators are linear") {
  std::mt19937_64 rng(5);
  const SparseMatrix<complex_t> m = random_sparse<complex_t>(12, 12, 0.4, rng);
  CHECK(linearity_defect(make_operator(m), rng) <= 1e-12);
  const DenseMatrix<complex_t> d = densify(make_operator(m));
  CHECK((d - to_dense(m)).norm() == 0.0);
}

TEST_CASE_TEMPLATE("matrix market round trip is exact", T, double, complex_t) {
  std::mt19937_64 rng(6);
  const SparseMatrix<T> m = random_sparse<T>(9, 7, 0.4, rng);
  std::stringstream ss;
  write_matrix_market(ss, m);
  const SparseMatrix<T> r = read_matrix_market<T>(ss);
  CHECK(r.rows() == 9);
  CHECK(r.cols() == 7);
  CHECK(std::vector<index_t>(r.row_ptr().begin(), r.row_ptr().end()) ==
        std::vector<index_t>(m.row_ptr().begin(), m.row_ptr().end()));
  CHECK(std::vector<index_t>(r.col_idx().begin(), r.col_idx().end()) ==
        std::vector<index_t>(m.col_idx().begin(), m.col_idx().end()));
  CHECK(std::vector<T>(r.values().begin(), r.values().end()) == std::vector<T>(m.values().begin(), m.values().end()));
}

TEST_CASE("matrix market symmetry expansion") {
  std::istringstream sym("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 4\n2 1 -1\n3 2 2.5\n");
  const DenseMatrix<double> s = to_dense(read_matrix_market<double>(sym));
  Eigen::Matrix3d ref;
  ref << 4, -1, 0, -1, 0, 2.5, 0, 2.5, 0;
  CHECK((s - ref).norm() == 0.0);

  std::istringstream skew("%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 3\n");
  const DenseMatrix<double> k = to_dense(read_matrix_market<double>(skew));
  CHECK(k(1, 0) == 3.0);
  CHECK(k(0, 1) == -3.0);

  std::istringstream herm("%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n");
  const DenseMatrix<complex_t> h = to_dense(read_matrix_market<complex_t>(herm));
  CHECK(h(0, 1) == complex_t(1, -2));
}

TEST_CASE("matrix market errors carry line numbers") {
  auto line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_matrix_market<double>(in);
    } catch (const MatrixMarketError& e) {
      return e.line();
    }
    return std::size_t(999);
  };
  CHECK(line_of("%%MatrixMarket matrix array real general\n") == 1);
  CHECK(line_of("%%MatrixMarket matrix coordinate real general\n% c\n2 2 1\n3 1 1.0\n") == 4);
  CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n") == 3);
  CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 2.0\n") == 4);
  CHECK(line_of("%%MatrixMarket matrix coordinate real general\n2 x 1\n") == 2);
  std::istringstream cplx("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 1\n");
  CHECK_THROWS_AS(read_matrix_market<double>(cplx), MatrixMarketError);
}

TEST_CASE("block assembly and slicing") {
  std::mt19937_64 rng(7);
  const auto a = random_sparse<double>(3, 3, 0.5, rng), b = random_sparse<double>(3, 2, 0.5, rng),
             c = random_sparse<double>(2, 3, 0.5, rng), d = random_sparse<double>(2, 2, 0.5, rng);
  const SparseMatrix<double> full = block_assemble(a, b, c, d);
  DenseMatrix<double> ref(5, 5);
  ref << to_dense(a), to_dense(b), to_dense(c), to_dense(d);
  CHECK((to_dense(full) - ref).norm() == 0.0);
  CHECK(max_abs_difference(submatrix(full, 3, 0, 2, 3), c) == 0.0);
  const SparseMatrix<double> k = kron(SparseMatrix<double>::identity(2), d);
  CHECK(k.rows() == 4);
  CHECK(k.at(3, 3) == d.at(1, 1));
}
