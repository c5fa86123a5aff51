#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "ppsolve/experiment.hpp"
#include "ppsolve/image.hpp"
#include "ppsolve/problems.hpp"
#include "support/oracles.hpp"

using namespace ppsolve;

TEST_CASE("skew block problem structure") {
  CHECK(skew_block_q(800) == 720);
  CHECK(skew_block_q(15) == 14);  // 13.5 rounds up
  CHECK_THROWS(gen_skew_block(9));

  const auto [pr, sp] = gen_skew_block(20);
  CHECK(pr.q == 18);
  CHECK(pr.W.at(0, 0) == 2.0);
  CHECK(pr.W.at(1, 1) == 3.0);
  CHECK(pr.W.at(0, 1) == 1.0);
  CHECK(pr.Omega.at(0, 0) == 1.0);
  CHECK(pr.Omega.at(1, 1) == doctest::Approx(0.5));
  // f_{k,j} = j at k = j + 2q - n (1-based)
  for (std::size_t j = 1; j <= pr.n - pr.q; ++j) {
    const std::size_t k = j + 2 * pr.q - pr.n;
    CHECK(pr.F.at(k - 1, j - 1) == static_cast<double>(j));
  }
  CHECK(max_abs_difference(sp.P1() + sp.P2(), pr.A) == 0.0);
  CHECK(is_skew_hermitian(sp.P2()));
  CHECK(sp.block_split() == std::optional<std::size_t>(18));
  CHECK(is_pd(definiteness(pr.A).kind));
  const Vector<double> ones(20, 1.0);
  CHECK(pr.A.multiply(ones) == pr.b);

  const DenseMatrix<double> s = to_dense(block_skew_identity(20, 18));
  CHECK((s + s.transpose()).norm() == 0.0);
  CHECK(s(0, 18) == 1.0);
  CHECK(s(18, 0) == -1.0);
  CHECK(s.cwiseAbs().sum() == 4.0);
}

TEST_CASE("complex shifted system at m = 2") {
  const ComplexShiftProblem pr = gen_complex_shift(2);
  const double s3 = std::sqrt(3.0);
  CHECK(pr.p == 4);
  CHECK(pr.h == doctest::Approx(1.0 / 3.0));
  CHECK(pr.K.at(0, 0) == doctest::Approx(36.0));
  CHECK(pr.K.at(0, 1) == doctest::Approx(-9.0));
  CHECK(pr.K.at(0, 3) == 0.0);
  CHECK(pr.W.at(0, 0) == doctest::Approx(36.0 + 3.0 * (3.0 - s3)));
  CHECK(pr.T.at(0, 0) == doctest::Approx(36.0 + 3.0 * (3.0 + s3)));
  CHECK(std::abs(pr.b[0] - complex_t(0.75, -0.75)) <= 1e-15);
  CHECK(std::abs(pr.b[3] - complex_t(4.0, -4.0) * 3.0 / 25.0) <= 1e-15);

  const BlockSaddleSystem<double> rf = pr.real_form();
  CHECK(max_abs_difference(rf.A, pr.W) == 0.0);
  CHECK(max_abs_difference(rf.B, scaled(-1.0, pr.T)) == 0.0);
  CHECK(max_abs_difference(rf.C, pr.T) == 0.0);
  CHECK(rf.rhs[4] == pr.b[0].imag());

  // the real form reproduces the complex product
  std::mt19937_64 rng(51);
  const Vector<complex_t> z = random_vector<complex_t>(4, rng);
  const Vector<complex_t> az = pr.complex_matrix().multiply(z);
  Vector<double> zr(8);
  for (std::size_t i = 0; i < 4; ++i) zr[i] = z[i].real(), zr[4 + i] = z[i].imag();
  const Vector<double> ar = rf.assemble().multiply(zr);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(ar[i] == doctest::Approx(az[i].real()));
    CHECK(ar[4 + i] == doctest::Approx(az[i].imag()));
  }
}

TEST_CASE("oseen surrogate") {
  const BlockSaddleSystem<double> s = gen_oseen_surrogate(12, 5, 7);
  CHECK(s.n() == 12);
  CHECK(s.m() == 5);
  CHECK(max_abs_difference(s.C, scaled(-1.0, s.B.transpose())) == 0.0);
  CHECK(is_pd(definiteness(s.A).kind));
  CHECK(s.rhs == s.assemble().multiply(Vector<double>(17, 1.0)));
  const BlockSaddleSystem<double> again = gen_oseen_surrogate(12, 5, 7);
  CHECK(max_abs_difference(again.B, s.B) == 0.0);
}

TEST_CASE("image operators") {
  const DenseMatrix<double> k = gaussian_toeplitz(5, 2.0);
  CHECK(k(0, 0) == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * M_PI))));
  CHECK(k(0, 4) == doctest::Approx(std::exp(-2.0) / (2.0 * std::sqrt(2.0 * M_PI))));
  const SparseMatrix<double> g = circulant_second_difference(5);
  CHECK(g.at(0, 0) == -2.0);
  CHECK(g.at(0, 1) == 1.0);
  CHECK(g.at(0, 4) == 1.0);
  CHECK(g.at(0, 2) == 0.0);

  const ImageRestorationProblem pr = gen_image_restoration(8, 6, 2.0, 1e-2, 30.0, synthetic_image(8, 6), 3);
  const BlockSaddleSystem<double> s = pr.assemble();
  const SparseMatrix<double> full = s.assemble();
  std::mt19937_64 rng(52);
  const Vector<double> x = random_vector<double>(pr.size(), rng);
  const Vector<double> y1 = pr.op().apply(x), y2 = full.multiply(x);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) err = std::max(err, std::abs(y1[i] - y2[i])), ref = std::max(ref, std::abs(y2[i]));
  CHECK(err <= 1e-12 * ref);

  CHECK(pr.frobenius_norm() == doctest::Approx(frobenius_norm(full)).epsilon(1e-12));
  for (auto v : {QVariant::identity, QVariant::diag_hermitian, QVariant::block_D_N}) {
    const SparseMatrix<double> q = build_Q(v, s, pr.eps);
    CHECK(pr.q_norm(v) == doctest::Approx(frobenius_norm(q)).epsilon(1e-12));
    CHECK(pr.alpha_star(v) == doctest::Approx(alpha_star(full, q)).epsilon(1e-12));
    CHECK(max_abs_difference(pr.q_matrix(v), q) <= 1e-14);
  }
  const Vector<double> r = pr.rhs();
  CHECK(r.size() == pr.size());
  CHECK(r[pr.block_size()] == 0.0);
}

TEST_CASE("snr and pgm round trip") {
  const DenseMatrix<double> img = synthetic_image(9, 7);
  CHECK(std::isinf(snr_psnr(img, img).snr_db));
  DenseMatrix<double> noisy = img;
  noisy(0, 0) += 10.0;
  const ImageQuality q = snr_psnr(img, noisy);
  CHECK(q.psnr_db == doctest::Approx(10.0 * std::log10(255.0 * 255.0 * 63.0 / 100.0)));
  CHECK(q.snr_db > 0.0);

  const auto path = std::filesystem::temp_directory_path() / "ppsolve_unit.pgm";
  write_pgm(path.string(), img);
  const DenseMatrix<double> back = read_pgm(path.string());
  CHECK(back.rows() == img.rows());
  CHECK(back.cols() == img.cols());
  CHECK((back - img.array().round().matrix()).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove(path);
}
