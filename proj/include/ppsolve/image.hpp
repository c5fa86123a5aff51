#pragma once

#include <cstdint>
#include <string>

#include "ppsolve/preconditioners.hpp"

namespace ppsolve {

/// Regularized deblurring of a p-by-q image as the saddle system
///   [I, I_q (x) K; -I_q (x) K^T, mu^2 I_q (x) G^T G] [x1; x2] = [vec F; 0]
/// with x2 the restored image. Vectors use column-major vec(X). The
/// Kronecker blocks are applied as K X and G^T G X and never stored.
struct ImageRestorationProblem {
  std::size_t p = 0, q = 0;
  double sigma = 0.0, mu = 0.0, snr_db = 0.0, eps = 1e-4;
  std::uint64_t noise_seed = 0;
  DenseMatrix<double> K;
  SparseMatrix<double> G, GtG;
  DenseMatrix<double> X_org, F_observed;

  std::size_t block_size() const { return p * q; }
  std::size_t size() const { return 2 * p * q; }

  LinearOperator<double> op() const;
  Vector<double> rhs() const;
  SppsBlocks<double> blocks() const;

  /// ||A||_F and ||Q||_F from Kronecker norm identities.
  double frobenius_norm() const;
  double q_norm(QVariant v) const;
  double alpha_star(QVariant v) const;
  /// Diagonal Q for identity, D_A and D_N (all diagonal here since H_A = I).
  SparseMatrix<double> q_matrix(QVariant v) const;

  /// Explicit sparse assembly. Test sizes only.
  BlockSaddleSystem<double> assemble() const;

  DenseMatrix<double> unvec(std::span<const double> x2) const;
};

/// k_ij = exp(-|i-j|^2 / (2 sigma^2)) / (sigma sqrt(2 pi))
DenseMatrix<double> gaussian_toeplitz(std::size_t p, double sigma);
/// -2 on the diagonal, 1 on both neighbours with wraparound.
SparseMatrix<double> circulant_second_difference(std::size_t p);

/// 255 * (0.5 * checkerboard(8 px) + 0.5 * gradient).
DenseMatrix<double> synthetic_image(std::size_t p, std::size_t q);

ImageRestorationProblem gen_image_restoration(std::size_t p, std::size_t q, double sigma, double mu, double snr_db,
                                              const DenseMatrix<double>& image, std::uint64_t seed,
                                              double eps = 1e-4);

struct ImageQuality {
  double snr_db = 0.0;
  double psnr_db = 0.0;
};

/// SNR and PSNR in dB; +infinity when X equals X_org.
ImageQuality snr_psnr(const DenseMatrix<double>& x_org, const DenseMatrix<double>& x);

/// Binary PGM (P5), 8 or 16 bit.
DenseMatrix<double> read_pgm(const std::string& path);
/// Values are clamped to [0, 255] and rounded.
void write_pgm(const std::string& path, const DenseMatrix<double>& img);

}  // namespace ppsolve
