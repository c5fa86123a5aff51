#include <doctest.h>

#include "ppsolve/preconditioners.hpp"
#include "ppsolve/stationary.hpp"
#include "support/oracles.hpp"

using namespace ppsolve;
using oracle::CMat;

namespace {

template <Scalar T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <Scalar T>
Vec<T> as_eigen(const Vector<T>& v) {
  return Eigen::Map<const Vec<T>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <Scalar T>
double rel(const Vec<T>& x, const Vec<T>& ref) {
  return (x - ref).norm() / std::max(ref.norm(), 1e-300);
}

template <Scalar T>
BlockSaddleSystem<T> random_saddle(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  const DenseMatrix<T> a = oracle::random_psd<T>(n, n, 0.5, 1.0, rng);
  const DenseMatrix<T> d = oracle::random_psd<T>(m, m, 0.5, 1.0, rng);
  const DenseMatrix<T> b = oracle::gaussian<T>(n, m, rng);
  const DenseMatrix<T> c = -b.adjoint();
  return BlockSaddleSystem<T>(oracle::sparse<T>(a), oracle::sparse<T>(b), oracle::sparse<T>(c), oracle::sparse<T>(d));
}

SparseMatrix<double> mat2(double a, double b, double c, double d) {
  return SparseMatrix<double>::from_dense((Eigen::Matrix2d() << a, b, c, d).finished());
}

}  // namespace

TEST_CASE("split1 on a 2x2 example") {
  const auto sp = split1_triangular(mat2(2, 1, -1, 2));
  CHECK((to_dense(sp.P1()) - Eigen::Matrix2d(Eigen::Matrix2d::Identity() * 2)).norm() == 0.0);
  CHECK((to_dense(sp.P2()) - (Eigen::Matrix2d() << 0, 1, -1, 0).finished()).norm() == 0.0);
  CHECK(sp.p2_skew());

  // Hermitian A: U^* = L, so P1 = D + 2L and P2 = U - L
  const auto herm = split1_triangular(mat2(2, 1, 1, 2));
  CHECK((to_dense(herm.P1()) - (Eigen::Matrix2d() << 2, 0, 2, 2).finished()).norm() == 0.0);
  CHECK((to_dense(herm.P2()) - (Eigen::Matrix2d() << 0, 1, -1, 0).finished()).norm() == 0.0);
}

TEST_CASE_TEMPLATE("split1 has an exactly skew P2", T, double, complex_t) {
  std::mt19937_64 rng(21);
  const SparseMatrix<T> a = oracle::sparse<T>(oracle::gaussian<T>(10, 10, rng));
  const auto sp = split1_triangular(a);
  const SparseMatrix<T> sum = sp.P2() + sp.P2().adjoint();
  for (const T& v : sum.values()) CHECK(v == T(0));
  CHECK(max_abs_difference(sp.P1() + sp.P2(), a) <= 1e-12 * frobenius_norm(a));
}

TEST_CASE("split2 with C = -B^*") {
  std::mt19937_64 rng(22);
  const auto s = random_saddle<double>(4, 3, rng);
  const auto sp = split2_block_triangular(s);
  const DenseMatrix<double> p1 = to_dense(sp.P1()), p2 = to_dense(sp.P2());
  CHECK(p1.block(0, 4, 4, 3).norm() == 0.0);
  CHECK(p1.block(4, 0, 3, 4).norm() <= 1e-15);
  CHECK((p2 + p2.transpose()).norm() == 0.0);
  CHECK((p1.topLeftCorner(4, 4) - to_dense(s.A)).norm() == 0.0);
  CHECK((p1.bottomRightCorner(3, 3) - to_dense(s.D)).norm() == 0.0);
  CHECK(max_abs_difference(sp.P1() + sp.P2(), s.assemble()) <= 1e-12);
  CHECK(sp.block_split() == std::optional<std::size_t>(4));
}

TEST_CASE("split3 copies A") {
  std::mt19937_64 rng(23);
  const SparseMatrix<double> a = oracle::sparse<double>(oracle::random_psd<double>(5, 5, 0.5, 1.0, rng));
  const auto sp = split3_shift(a);
  CHECK(sp.P2().nnz() == 0);
  CHECK(std::vector<double>(sp.P1().values().begin(), sp.P1().values().end()) ==
        std::vector<double>(a.values().begin(), a.values().end()));
  CHECK(sp.certificates().at("P1_PD"));
}

TEST_CASE("saddle splittings on the 1+1 example") {
  const auto one = SparseMatrix<double>::identity(1);
  const BlockSaddleSystem<double> s(one, one, scaled(-1.0, one), one);
  const auto a = saddle_split_A(s);
  CHECK((to_dense(a.P1()) - (Eigen::Matrix2d() << 0, 0, 0, 1).finished()).norm() == 0.0);
  CHECK((to_dense(a.P2()) - (Eigen::Matrix2d() << 1, 1, -1, 0).finished()).norm() == 0.0);
  const auto b = saddle_split_B(s);
  CHECK((to_dense(b.P2()) - (Eigen::Matrix2d() << 0, 1, -1, 1).finished()).norm() == 0.0);
  CHECK(max_abs_difference(b.P1() + b.P2(), s.assemble()) == 0.0);
  CHECK(a.certified());
  CHECK(b.certified());
}

TEST_CASE("spps recipes reconstruct A") {
  std::mt19937_64 rng(24);
  const auto s = random_saddle<complex_t>(5, 3, rng);
  for (const std::string name : {"split2", "saddleA", "saddleB", "spps1", "spps2", "split1", "split3", "hss"}) {
    const auto sp = make_splitting<complex_t>(name, s.assemble(), &s);
    CHECK(max_abs_difference(sp.P1() + sp.P2(), s.assemble()) <= 1e-12 * frobenius_norm(s.assemble()));
  }
  CHECK_THROWS_AS(make_splitting<complex_t>("nope", s.assemble(), &s), std::invalid_argument);
  CHECK_THROWS_AS(make_splitting<complex_t>("spps1", s.assemble(), nullptr), std::invalid_argument);
}

TEST_CASE("skew shift keeps the sum") {
  std::mt19937_64 rng(25);
  const auto inst = oracle::random_instance<double>(8, false, rng);
  const auto sp = inst.splitting();
  const DenseMatrix<double> g = oracle::gaussian<double>(8, 8, rng);
  const auto shifted = skew_shift(sp, oracle::sparse<double>(DenseMatrix<double>(g - g.transpose())));
  CHECK(max_abs_difference(shifted.P1() + shifted.P2(), sp.A()) <= 1e-13 * frobenius_norm(sp.A()));
  const auto same = skew_shift(sp, SparseMatrix<double>::zeros(8, 8));
  CHECK(max_abs_difference(same.P1(), sp.P1()) == 0.0);
  CHECK_THROWS(skew_shift(sp, oracle::sparse<double>(g)));
}

TEST_CASE("alpha_star and Q rescaling") {
  CHECK(alpha_star(SparseMatrix<double>::identity(6), SparseMatrix<double>::identity(6)) == doctest::Approx(0.5));
  std::mt19937_64 rng(26);
  const SparseMatrix<double> a = oracle::sparse<double>(oracle::gaussian<double>(7, 7, rng));
  const SparseMatrix<double> q = oracle::sparse<double>(oracle::random_hpd<double>(7, rng));
  const double k = 3.7;
  const double a1 = alpha_star(a, q), a2 = alpha_star(a, scaled(k, q));
  CHECK(a2 == doctest::Approx(a1 / k).epsilon(1e-14));
  CHECK(max_abs_difference(scaled(a1, q), scaled(a2, scaled(k, q))) <= 1e-13 * frobenius_norm(scaled(a1, q)));
  CHECK_THROWS(alpha_star(a, SparseMatrix<double>::zeros(7, 7)));
}

TEST_CASE("build_Q variants") {
  CHECK(max_abs_difference(build_Q(QVariant::identity, SparseMatrix<double>::identity(4)),
                           SparseMatrix<double>::identity(4)) == 0.0);
  std::mt19937_64 rng(27);
  const auto s = random_saddle<double>(4, 3, rng);
  const DenseMatrix<double> ha = to_dense(hermitian_part(s.A));
  const DenseMatrix<double> hd = to_dense(hermitian_part(s.D)) + 1e-2 * DenseMatrix<double>::Identity(3, 3);
  const DenseMatrix<double> da = to_dense(build_Q(QVariant::diag_hermitian, s, 1e-2));
  const DenseMatrix<double> dn = to_dense(build_Q(QVariant::block_D_N, s, 1e-2));
  const DenseMatrix<double> dm = to_dense(build_Q(QVariant::block_D_N_mirror, s, 1e-2));
  CHECK((da.diagonal().head(4) - ha.diagonal()).norm() == 0.0);
  CHECK((da.diagonal().tail(3) - hd.diagonal()).norm() <= 1e-15);
  CHECK((da - DenseMatrix<double>(da.diagonal().asDiagonal())).norm() == 0.0);
  CHECK((dn.topLeftCorner(4, 4) - ha).norm() <= 1e-15);
  CHECK((dm.bottomRightCorner(3, 3) - hd).norm() <= 1e-15);

  // a zero diagonal is reported rather than accepted
  const auto z1 = SparseMatrix<double>::zeros(1, 1), one = SparseMatrix<double>::identity(1);
  const BlockSaddleSystem<double> bad(z1, one, scaled(-1.0, one), z1);
  CHECK_THROWS(build_Q(QVariant::diag_hermitian, bad, 0.0));
}

TEST_CASE("shift matrix solves") {
  std::mt19937_64 rng(28);
  const DenseMatrix<double> q = oracle::random_hpd<double>(6, rng);
  const ShiftMatrix<double> s(oracle::sparse<double>(q), 2.5);
  CHECK(s.solver() == ShiftSolver::dense_cholesky);
  const Vector<double> v = random_vector<double>(6, rng);
  CHECK(rel<double>(as_eigen(s.solve(v)), (2.5 * q).llt().solve(as_eigen(v))) <= 1e-13);
  const DenseMatrix<double> r = s.sqrt_dense();
  CHECK((r * r - 2.5 * q).norm() <= 1e-12 * q.norm());
  CHECK((r * s.inv_sqrt_dense() - DenseMatrix<double>::Identity(6, 6)).norm() <= 1e-12);
  CHECK(ShiftMatrix<double>(SparseMatrix<double>::identity(3), 1.0).is_diagonal());
  CHECK_THROWS(ShiftMatrix<double>(scaled(-1.0, SparseMatrix<double>::identity(3)), 1.0));
}

TEST_CASE_TEMPLATE("pps_step matches the dense oracle", T, double, complex_t) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto inst = oracle::random_instance<T>(8, true, rng);
    const auto sp = inst.splitting();
    const auto sig = inst.shift();
    const Vector<T> u = random_vector<T>(8, rng), b = random_vector<T>(8, rng);
    const Vec<T> got = as_eigen(pps_step<T>(sp, sig, u, b, InnerSolveConfig::exact()));
    const DenseMatrix<T> g = oracle::gamma<DenseMatrix<T>>(inst.p1, inst.p2, inst.sigma);
    const auto pl = (inst.sigma + inst.p1).lu();
    const Vec<T> c = 2.0 * pl.solve(inst.sigma * (inst.sigma + inst.p2).lu().solve(as_eigen(b)));
    CHECK(rel<T>(got, g * as_eigen(u) + c) <= 1e-10);

    // step(u) - step(v) = Gamma (u - v), and two steps give Gamma^2
    const Vector<T> v = random_vector<T>(8, rng);
    const PpsIteration<T> it(sp, sig, InnerSolveConfig::exact());
    const Vec<T> d2 = as_eigen(it.step(it.step(u, b), b)) - as_eigen(it.step(it.step(v, b), b));
    CHECK(rel<T>(d2, g * g * (as_eigen(u) - as_eigen(v))) <= 1e-9);
  }
}

TEST_CASE("solution is a fixed point and Gamma = 0 solves in one step") {
  std::mt19937_64 rng(32);
  const auto inst = oracle::random_instance<double>(8, true, rng);
  const auto sp = inst.splitting();
  const Vector<double> b = random_vector<double>(8, rng);
  const Vec<double> x = (inst.p1 + inst.p2).lu().solve(as_eigen(b));
  const Vector<double> xs(x.data(), x.data() + 8);
  CHECK(rel<double>(as_eigen(pps_step<double>(sp, inst.shift(), xs, b, InnerSolveConfig::exact())), x) <= 1e-10);

  const DenseMatrix<double> p1 = oracle::random_hpd<double>(6, rng);
  const PPSplitting<double> sp0(oracle::sparse<double>(p1), oracle::sparse<double>(p1),
                                SparseMatrix<double>::zeros(6, 6));
  const ShiftMatrix<double> sig(oracle::sparse<double>(p1), 1.0);
  const Vector<double> b6 = random_vector<double>(6, rng);
  StationaryConfig cfg;
  cfg.rel_residual_tol = 1e-12;
  const auto r = pps_solve<double>(sp0, sig, b6, Vector<double>(6, 0.0), cfg);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
}

TEST_CASE("damped iteration on the rotation counterexample") {
  const auto a = mat2(0, -1, 1, 0);
  const PPSplitting<double> sp(a, a, SparseMatrix<double>::zeros(2, 2));
  const ShiftMatrix<double> sig(SparseMatrix<double>::identity(2), 1.0);
  const Vector<double> b{1.0, 2.0};
  StationaryConfig cfg;
  cfg.max_iters = 200;
  const auto undamped = pps_solve<double>(sp, sig, b, Vector<double>(2, 0.0), cfg);
  CHECK_FALSE(undamped.report.converged);

  cfg.beta = 0.5;
  const auto damped = pps_solve<double>(sp, sig, b, Vector<double>(2, 0.0), cfg);
  REQUIRE(damped.report.converged);
  const auto& h = damped.report.residual_history;
  const std::size_t k = h.size() - 1;
  CHECK(std::pow(h[k] / h[k - 10], 0.1) == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
}

TEST_CASE("pps preconditioner") {
  std::mt19937_64 rng(33);
  const Vector<double> v = random_vector<double>(5, rng);
  {
    const PPSplitting<double> sp(SparseMatrix<double>::zeros(5, 5), SparseMatrix<double>::zeros(5, 5),
                                 SparseMatrix<double>::zeros(5, 5));
    const PpsPreconditioner<double> p(sp, ShiftMatrix<double>(SparseMatrix<double>::identity(5), 1.0),
                                      InnerSolveConfig::exact());
    CHECK(rel<double>(as_eigen(p.apply(v)), as_eigen(v)) <= 1e-15);
  }
  for (int trial = 0; trial < 4; ++trial) {
    const auto inst = oracle::random_instance<complex_t>(8, trial % 2 == 0, rng);
    const PpsPreconditioner<complex_t> p(inst.splitting(), inst.shift(), InnerSolveConfig::exact());
    const Vector<complex_t> w = random_vector<complex_t>(8, rng);
    const Vec<complex_t> y = as_eigen(p.apply(w));
    const DenseMatrix<complex_t> m = oracle::pps_matrix<DenseMatrix<complex_t>>(inst.p1, inst.p2, inst.sigma);
    CHECK(rel<complex_t>(m * y, as_eigen(w)) <= 1e-10);
  }
  // P2 = 0, Sigma = alpha I: the shift-splitting preconditioner
  const DenseMatrix<double> p1 = oracle::random_psd<double>(5, 5, 0.2, 1.0, rng);
  const PPSplitting<double> sp(oracle::sparse<double>(p1), oracle::sparse<double>(p1),
                               SparseMatrix<double>::zeros(5, 5));
  const PpsPreconditioner<double> p(sp, ShiftMatrix<double>(SparseMatrix<double>::identity(5), 0.7),
                                    InnerSolveConfig::exact());
  const Vec<double> ref = (0.7 * DenseMatrix<double>::Identity(5, 5) + p1).lu().solve(as_eigen(v));
  CHECK(rel<double>(as_eigen(p.apply(v)), ref) <= 1e-12);
}

TEST_CASE("spps with decoupled blocks halves the input") {
  const auto i4 = SparseMatrix<double>::identity(4), i3 = SparseMatrix<double>::identity(3);
  const BlockSaddleSystem<double> s(i4, SparseMatrix<double>::zeros(4, 3), SparseMatrix<double>::zeros(3, 4), i3);
  const Vector<double> x{1, 2, 3, 4, 5, 6, 7};
  for (auto var : {SppsVariant::spps1, SppsVariant::spps2}) {
    const SppsOperator<double> op(SppsBlocks<double>::from_system(s), ShiftMatrix<double>(i4, 1.0),
                                  ShiftMatrix<double>(i3, 1.0), var, InnerSolveConfig::exact());
    const Vector<double> y = op.apply(x);
    for (std::size_t i = 0; i < 7; ++i) CHECK(y[i] == doctest::Approx(x[i] / 2).epsilon(1e-14));
    // with B = C = 0 the Schur complement is the shifted diagonal block
    const Vector<double> probe = var == SppsVariant::spps1 ? Vector<double>{1, -1, 2, 0} : Vector<double>{3, 1, -2};
    const Vector<double> sv = op.schur_operator().apply(probe);
    for (std::size_t i = 0; i < probe.size(); ++i) CHECK(sv[i] == doctest::Approx(2 * probe[i]));
  }
}

TEST_CASE_TEMPLATE("spps operators match the dense oracle", T, double, complex_t) {
  std::mt19937_64 rng(34);
  const std::size_t n = 6, m = 4;
  const auto s = random_saddle<T>(n, m, rng);
  DenseMatrix<T> qb = DenseMatrix<T>::Zero(n + m, n + m);
  qb.topLeftCorner(n, n) = oracle::random_hpd<T>(n, rng);
  qb.bottomRightCorner(m, m) = oracle::random_hpd<T>(m, rng);
  const SparseMatrix<T> q = oracle::sparse<T>(qb);
  const double alpha = 0.8;
  auto [s1, s2] = split_shift<T>(q, alpha, n);
  const Vector<T> x = random_vector<T>(n + m, rng);
  for (auto var : {SppsVariant::spps1, SppsVariant::spps2}) {
    const SppsOperator<T> op(SppsBlocks<T>::from_system(s), s1, s2, var, InnerSolveConfig::exact());
    const auto sp = var == SppsVariant::spps1 ? spps1_split(s) : spps2_split(s);
    const DenseMatrix<T> sig = alpha * qb;
    const DenseMatrix<T> pm = oracle::pps_matrix<DenseMatrix<T>>(to_dense(sp.P1()), to_dense(sp.P2()), sig);
    CHECK(rel<T>(as_eigen(op.apply(x)), pm.lu().solve(as_eigen(x))) <= 1e-9);

    const DenseMatrix<T> a = to_dense(s.A), b = to_dense(s.B), c = to_dense(s.C), d = to_dense(s.D);
    const DenseMatrix<T> sig1 = sig.topLeftCorner(n, n), sig2 = sig.bottomRightCorner(m, m);
    const DenseMatrix<T> schur = var == SppsVariant::spps1 ? DenseMatrix<T>(a + sig1 - b * sig2.lu().solve(c))
                                                           : DenseMatrix<T>(d + sig2 - c * sig1.lu().solve(b));
    const Vector<T> probe = random_vector<T>(schur.rows(), rng);
    CHECK(rel<T>(as_eigen(op.schur_operator().apply(probe)), schur * as_eigen(probe)) <= 1e-12);
    CHECK_FALSE(op.schur_certified_hpd());  // A and D carry skew parts
  }
}

TEST_CASE("spps1 and spps2 agree under role exchange") {
  std::mt19937_64 rng(35);
  const std::size_t n = 5, m = 3;
  const auto s = random_saddle<double>(n, m, rng);
  const BlockSaddleSystem<double> swapped(s.D, s.C, s.B, s.A);
  const DenseMatrix<double> q1 = oracle::random_hpd<double>(n, rng), q2 = oracle::random_hpd<double>(m, rng);
  const ShiftMatrix<double> sg1(oracle::sparse<double>(q1), 0.6), sg2(oracle::sparse<double>(q2), 0.6);
  const SppsOperator<double> o1(SppsBlocks<double>::from_system(s), sg1, sg2, SppsVariant::spps1,
                                InnerSolveConfig::exact());
  const SppsOperator<double> o2(SppsBlocks<double>::from_system(swapped), sg2, sg1, SppsVariant::spps2,
                                InnerSolveConfig::exact());
  const Vector<double> x = random_vector<double>(n + m, rng);
  Vector<double> xp(x.begin() + n, x.end());
  xp.insert(xp.end(), x.begin(), x.begin() + n);
  const Vector<double> y1 = o1.apply(x), y2 = o2.apply(xp);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[m + i]) <= 1e-12);
  for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(y1[n + i] - y2[i]) <= 1e-12);
}

TEST_CASE("schur apply cost with diagonal Q2") {
  std::mt19937_64 rng(36);
  const auto s = random_saddle<double>(6, 4, rng);
  const SparseMatrix<double> q = SparseMatrix<double>::identity(10);
  auto [s1, s2] = split_shift<double>(q, 1.0, 6);
  const SppsOperator<double> op(SppsBlocks<double>::from_system(s), s1, s2, SppsVariant::spps1);
  const auto sop = op.schur_operator();
  const ApplyStats& st = op.stats();
  const std::size_t spmv0 = st.spmv, diag0 = st.diagonal_scales, axpy0 = st.axpy, sa0 = st.schur_applies;
  sop.apply(random_vector<double>(6, rng));
  CHECK(st.schur_applies - sa0 == 1);
  CHECK(st.spmv - spmv0 == 3);
  CHECK(st.diagonal_scales - diag0 == 1);
  CHECK(st.axpy - axpy0 == 1);
  CHECK(st.shift_solves == 0);
}
