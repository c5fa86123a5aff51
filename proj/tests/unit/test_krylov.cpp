#include <doctest.h>

#include "ppsolve/inner_solver.hpp"
#include "ppsolve/krylov.hpp"
#include "support/oracles.hpp"

using namespace ppsolve;

namespace {

SparseMatrix<double> laplace(std::size_t n) {
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
double rel_err(const Vector<T>& x, const Eigen::Matrix<T, Eigen::Dynamic, 1>& ref) {
  return (Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(x.data(), ref.size()) - ref).norm() / ref.norm();
}

}  // namespace

TEST_CASE("fgmres with identity converges in one step") {
  const auto op = identity_operator<double>(5);
  const Vector<double> b{1, 2, 3, 4, 5};
  const auto r = fgmres<double>(op, b, &op, {});
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.final_relative_residual == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.report.residual_history.size() == 2);
}

TEST_CASE_TEMPLATE("gmres solves a well-conditioned system", T, double, complex_t) {
  std::mt19937_64 rng(11);
  DenseMatrix<T> a = oracle::gaussian<T>(20, 20, rng) * 0.1;
  a += 2.0 * DenseMatrix<T>::Identity(20, 20);
  const Vector<T> b = random_vector<T>(20, rng);
  KrylovConfig cfg;
  cfg.restart = 5;
  const auto r = gmres<T>(make_operator(oracle::sparse<T>(a)), b, cfg);
  CHECK(r.report.converged);
  const auto ref = a.lu().solve(Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(b.data(), 20)).eval();
  CHECK(rel_err(r.x, ref) <= 1e-5);
  // residual norms never increase, and the restart gap stays small
  const auto& h = r.report.residual_history;
  for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1] * (1.0 + 1e-10));
  CHECK(r.report.restart_residual_gap <= 1e-8);
}

TEST_CASE("fgmres with M = I matches gmres") {
  std::mt19937_64 rng(12);
  const DenseMatrix<double> a = oracle::random_psd<double>(15, 15, 0.5, 1.0, rng);
  const Vector<double> b = random_vector<double>(15, rng);
  const auto op = make_operator(oracle::sparse<double>(a));
  const auto id = identity_operator<double>(15);
  KrylovConfig cfg;
  cfg.restart = 4;
  const auto r1 = gmres<double>(op, b, cfg);
  const auto r2 = fgmres<double>(op, b, &id, cfg);
  REQUIRE(r1.report.residual_history.size() == r2.report.residual_history.size());
  for (std::size_t i = 0; i < r1.x.size(); ++i) CHECK(std::abs(r1.x[i] - r2.x[i]) <= 1e-12);
}

TEST_CASE("preconditioner scaling leaves the iterates unchanged") {
  std::mt19937_64 rng(13);
  const DenseMatrix<double> a = oracle::random_psd<double>(30, 30, 0.1, 2.0, rng);
  const Vector<double> b = random_vector<double>(30, rng);
  const auto op = make_operator(oracle::sparse<double>(a));
  const DenseMatrix<double> approx = a.diagonal().asDiagonal();
  const auto minv = make_operator(oracle::sparse<double>(DenseMatrix<double>(approx.inverse())));
  const auto minv2 = make_operator(oracle::sparse<double>(DenseMatrix<double>(2.0 * approx.inverse())));
  KrylovConfig cfg;
  cfg.restart = 7;
  cfg.rel_tol = 1e-10;
  const auto r1 = fgmres<double>(op, b, &minv, cfg);
  const auto r2 = fgmres<double>(op, b, &minv2, cfg);
  CHECK(r1.report.iterations == r2.report.iterations);
  for (std::size_t i = 0; i < r1.report.residual_history.size(); ++i)
    CHECK(std::abs(r1.report.residual_history[i] - r2.report.residual_history[i]) <= 1e-12);
}

TEST_CASE("max_iters exhaustion reports non-convergence") {
  const auto op = make_operator(laplace(200));
  const Vector<double> b(200, 1.0);
  KrylovConfig cfg;
  cfg.restart = 3;
  cfg.max_iters = 6;
  const auto r = gmres<double>(op, b, cfg);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.termination == Termination::max_iters);
  CHECK(r.report.iterations == 6);
}

TEST_CASE("cg") {
  const Vector<double> b{1, 2, 3};
  const auto r0 = cg<double>(identity_operator<double>(3), b, {});
  CHECK(r0.report.iterations == 1);

  Vector<double> e1(64, 0.0);
  e1[0] = 1.0;
  KrylovConfig cfg;
  cfg.rel_tol = 1e-12;
  const auto r = cg<double>(make_operator(laplace(64)), e1, cfg);
  CHECK(r.report.converged);
  const Eigen::VectorXd ref = to_dense(laplace(64)).ldlt().solve(Eigen::Map<const Eigen::VectorXd>(e1.data(), 64));
  CHECK(rel_err(r.x, ref) <= 1e-9);

  std::mt19937_64 rng(14);
  const DenseMatrix<double> spd = oracle::random_hpd<double>(10, rng);
  cfg.rel_tol = 1e-14;
  const auto r10 = cg<double>(make_operator(oracle::sparse<double>(spd)), random_vector<double>(10, rng), cfg);
  CHECK(r10.report.iterations <= 12);

  CHECK_THROWS_AS(cg<double>(make_operator(scaled(-1.0, laplace(5))), Vector<double>(5, 1.0), {}),
                  NonPositiveCurvature);
}

TEST_CASE("inner gmres reaches the factor-10 reduction") {
  std::mt19937_64 rng(15);
  const DenseMatrix<double> a = oracle::random_psd<double>(8, 8, 0.3, 1.5, rng);
  InnerSolveConfig cfg;
  cfg.method = InnerMethod::gmres;
  const InnerSolver<double> s(make_operator(oracle::sparse<double>(a)), false, cfg, "probe");
  const Vector<double> b = random_vector<double>(8, rng);
  const Vector<double> x = s.solve(b);
  const Vector<double> ax = oracle::sparse<double>(a).multiply(x);
  CHECK(norm2(subtract<double>(ax, b)) <= norm2(b) / 10.0);
  CHECK(s.stats().unconverged == 0);
}

TEST_CASE("strict inner solves throw with the stage name") {
  InnerSolveConfig cfg;
  cfg.method = InnerMethod::gmres;
  cfg.restart = 2;
  cfg.max_inner_iters = 2;
  cfg.reduction_factor = 1e12;
  cfg.strict = true;
  const InnerSolver<double> s(make_operator(laplace(100)), false, cfg, "stage X");
  try {
    s.solve(Vector<double>(100, 1.0));
    FAIL("expected InnerSolveError");
  } catch (const InnerSolveError& e) {
    CHECK(e.stage() == "stage X");
  }
}
