#include "ppsolve/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ppsolve {

namespace {

using MapC = Eigen::Map<const Eigen::MatrixXd>;
using Map = Eigen::Map<Eigen::MatrixXd>;

}  // namespace

DenseMatrix<double> gaussian_toeplitz(std::size_t p, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_toeplitz: sigma must be positive");
  DenseMatrix<double> k(p, p);
  const double c = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      k(i, j) = c * std::exp(-d * d / (2.0 * sigma * sigma));
    }
  return k;
}

SparseMatrix<double> circulant_second_difference(std::size_t p) {
  DenseMatrix<double> g = DenseMatrix<double>::Zero(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    g(i, i) = -2.0;
    if (p > 1) {
      g(i, (i + 1) % p) = 1.0;
      g(i, (i + p - 1) % p) = 1.0;
    }
  }
  return SparseMatrix<double>::from_dense(g);
}

DenseMatrix<double> synthetic_image(std::size_t p, std::size_t q) {
  DenseMatrix<double> x(p, q);
  const double span = std::max<double>(1.0, static_cast<double>(p + q - 2));
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < q; ++b)
      x(a, b) = 255.0 * (0.5 * static_cast<double>((a / 8 + b / 8) % 2) + 0.5 * static_cast<double>(a + b) / span);
  return x;
}

ImageRestorationProblem gen_image_restoration(std::size_t p, std::size_t q, double sigma, double mu, double snr_db,
                                              const DenseMatrix<double>& image, std::uint64_t seed, double eps) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gen_image_restoration: sigma must be positive");
  if (static_cast<std::size_t>(image.rows()) != p || static_cast<std::size_t>(image.cols()) != q)
    throw DimensionError("gen_image_restoration: image is " + std::to_string(image.rows()) + "x" +
                         std::to_string(image.cols()) + ", expected " + std::to_string(p) + "x" + std::to_string(q));
  if (eps < 0.0) throw std::invalid_argument("gen_image_restoration: eps must be nonnegative");
  ImageRestorationProblem pr;
  pr.p = p;
  pr.q = q;
  pr.sigma = sigma;
  pr.mu = mu;
  pr.snr_db = snr_db;
  pr.eps = eps;
  pr.noise_seed = seed;
  pr.K = gaussian_toeplitz(p, sigma);
  pr.G = circulant_second_difference(p);
  pr.GtG = SparseMatrix<double>::from_dense(to_dense(pr.G).transpose() * to_dense(pr.G));
  pr.X_org = image;

  const DenseMatrix<double> kx = pr.K * image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix<double> phi(p, q);
  for (Eigen::Index j = 0; j < phi.cols(); ++j)
    for (Eigen::Index i = 0; i < phi.rows(); ++i) phi(i, j) = g(rng);
  const double pn = phi.norm();
  if (pn > 0.0) phi *= kx.norm() * std::pow(10.0, -snr_db / 20.0) / pn;
  pr.F_observed = kx + phi;
  return pr;
}

LinearOperator<double> ImageRestorationProblem::op() const {
  auto self = std::make_shared<const ImageRestorationProblem>(*this);
  const std::size_t nb = block_size();
  auto fwd = [self, nb](std::span<const double> x, std::span<double> y) {
    const auto p = static_cast<Eigen::Index>(self->p), q = static_cast<Eigen::Index>(self->q);
    MapC x1(x.data(), p, q), x2(x.data() + nb, p, q);
    Map y1(y.data(), p, q), y2(y.data() + nb, p, q);
    y1.noalias() = x1 + self->K * x2;
    y2.noalias() = -self->K.transpose() * x1;
    Vector<double> t(self->p);
    const double mu2 = self->mu * self->mu;
    for (Eigen::Index j = 0; j < q; ++j) {
      self->GtG.multiply(x.subspan(nb + static_cast<std::size_t>(j * p), self->p), t);
      for (Eigen::Index i = 0; i < p; ++i) y2(i, j) += mu2 * t[static_cast<std::size_t>(i)];
    }
  };
  return LinearOperator<double>(size(), fwd);
}

Vector<double> ImageRestorationProblem::rhs() const {
  Vector<double> b(size(), 0.0);
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < p; ++i) b[j * p + i] = F_observed(i, j);
  return b;
}

SppsBlocks<double> ImageRestorationProblem::blocks() const {
  auto self = std::make_shared<const ImageRestorationProblem>(*this);
  const std::size_t nb = block_size();
  const auto pe = static_cast<Eigen::Index>(p), qe = static_cast<Eigen::Index>(q);
  SppsBlocks<double> b;
  b.n = nb;
  b.m = nb;
  b.A = {nb, nb, [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); }};
  b.B = {nb, nb, [self, pe, qe](std::span<const double> x, std::span<double> y) {
           Map(y.data(), pe, qe).noalias() = self->K * MapC(x.data(), pe, qe);
         }};
  b.C = {nb, nb, [self, pe, qe](std::span<const double> x, std::span<double> y) {
           Map(y.data(), pe, qe).noalias() = -self->K.transpose() * MapC(x.data(), pe, qe);
         }};
  b.D = {nb, nb, [self, pe, qe](std::span<const double> x, std::span<double> y) {
           const double mu2 = self->mu * self->mu;
           for (Eigen::Index j = 0; j < qe; ++j) {
             const std::size_t off = static_cast<std::size_t>(j * pe);
             self->GtG.multiply(x.subspan(off, self->p), y.subspan(off, self->p));
             for (std::size_t i = 0; i < self->p; ++i) y[off + i] *= mu2;
           }
         }};
  b.a_hermitian_psd = true;
  b.d_hermitian_psd = true;
  b.c_is_minus_b_adjoint = true;
  return b;
}

double ImageRestorationProblem::frobenius_norm() const {
  const double qd = static_cast<double>(q), pq = static_cast<double>(p * q);
  const double kf = K.squaredNorm(), gf = std::pow(ppsolve::frobenius_norm(GtG), 2);
  const double mu4 = std::pow(mu, 4);
  return std::sqrt(pq + 2.0 * qd * kf + mu4 * qd * gf);
}

SparseMatrix<double> ImageRestorationProblem::q_matrix(QVariant v) const {
  const std::size_t nb = block_size();
  Vector<double> d(2 * nb, 1.0);
  if (v == QVariant::identity) return SparseMatrix<double>::diagonal(d);
  if (v != QVariant::diag_hermitian && v != QVariant::block_D_N)
    throw std::invalid_argument("image problem: Q variant '" + std::string(to_string(v)) +
                                "' is not supported (use identity, D_A or D_N)");
  const Vector<double> gd = GtG.diagonal_values();
  for (std::size_t j = 0; j < q; ++j)
    for (std::size_t i = 0; i < p; ++i) d[nb + j * p + i] = mu * mu * gd[i] + eps;
  return SparseMatrix<double>::diagonal(d);
}

double ImageRestorationProblem::q_norm(QVariant v) const {
  const double pq = static_cast<double>(p * q);
  if (v == QVariant::identity) return std::sqrt(2.0 * pq);
  if (v != QVariant::diag_hermitian && v != QVariant::block_D_N)
    throw std::invalid_argument("image problem: Q variant '" + std::string(to_string(v)) +
                                "' is not supported (use identity, D_A or D_N)");
  double s = 0.0;
  for (double g : GtG.diagonal_values()) s += std::pow(mu * mu * g + eps, 2);
  return std::sqrt(pq + static_cast<double>(q) * s);
}

double ImageRestorationProblem::alpha_star(QVariant v) const { return frobenius_norm() / (2.0 * q_norm(v)); }

BlockSaddleSystem<double> ImageRestorationProblem::assemble() const {
  const SparseMatrix<double> iq = SparseMatrix<double>::identity(q);
  const SparseMatrix<double> ks = SparseMatrix<double>::from_dense(K);
  SparseMatrix<double> b = kron(iq, ks);
  SparseMatrix<double> c = scaled(-1.0, kron(iq, SparseMatrix<double>::from_dense(K.transpose())));
  SparseMatrix<double> d = scaled(mu * mu, kron(iq, GtG));
  return BlockSaddleSystem<double>(SparseMatrix<double>::identity(block_size()), std::move(b), std::move(c),
                                   std::move(d), rhs());
}

DenseMatrix<double> ImageRestorationProblem::unvec(std::span<const double> x2) const {
  require_dims(x2.size() == block_size(), "unvec: length must be p*q");
  return MapC(x2.data(), static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
}

ImageQuality snr_psnr(const DenseMatrix<double>& x_org, const DenseMatrix<double>& x) {
  require_dims(x_org.rows() == x.rows() && x_org.cols() == x.cols(), "snr_psnr: image sizes differ");
  const double err = (x_org - x).norm();
  if (err == 0.0) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const double pq = static_cast<double>(x.rows() * x.cols());
  return {20.0 * std::log10(x_org.norm() / err), 20.0 * std::log10(255.0 * std::sqrt(pq) / err)};
}

namespace {

std::string pgm_token(std::istream& in) {
  std::string tok;
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  return tok;
}

}  // namespace

DenseMatrix<double> read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  if (pgm_token(in) != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
  const long w = std::stol(pgm_token(in)), h = std::stol(pgm_token(in)), maxval = std::stol(pgm_token(in));
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw std::runtime_error(path + ": bad PGM header");
  in.get();
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w * h * bytes));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw std::runtime_error(path + ": truncated PGM");
  DenseMatrix<double> img(h, w);
  for (long r = 0; r < h; ++r)
    for (long c = 0; c < w; ++c) {
      const std::size_t k = static_cast<std::size_t>(r * w + c) * bytes;
      const double v = bytes == 1 ? raw[k] : raw[k] * 256.0 + raw[k + 1];
      img(r, c) = v * 255.0 / static_cast<double>(maxval);
    }
  return img;
}

void write_pgm(const std::string& path, const DenseMatrix<double>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double v = std::clamp(std::round(img(r, c)), 0.0, 255.0);
      out.put(static_cast<char>(static_cast<unsigned char>(v)));
    }
}

}  // namespace ppsolve
