#include "ppsolve/kernels.hpp"

#include <stdexcept>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace ppsolve::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double squared_norm(const double* x, std::size_t n) { return dot(x, x, n); }

void scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    std::int64_t k = row_ptr[r];
    const std::int64_t end = row_ptr[r + 1];
    double s = 0.0;
    if (end - k >= 4) {
      __m256d acc = _mm256_setzero_pd();
      for (; k + 4 <= end; k += 4) {
        const __m256i idx = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(col_idx + k));
        const __m256d xv = _mm256_i64gather_pd(x, idx, 8);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(values + k), xv, acc);
      }
      s = hsum(acc);
    }
    for (; k < end; ++k) s += values[k] * x[col_idx[k]];
    y[r] = s;
  }
}

}  // namespace ppsolve::kernels::avx2

#else

// Built without AVX2 support (non-x86 host); the dispatcher never selects
// these, but the symbols must exist.
namespace ppsolve::kernels::avx2 {

[[noreturn]] static void unavailable() { throw std::logic_error("AVX2 kernels not compiled in"); }

double dot(const double*, const double*, std::size_t) { unavailable(); }
void axpy(double, const double*, double*, std::size_t) { unavailable(); }
double squared_norm(const double*, std::size_t) { unavailable(); }
void scale(double, double*, std::size_t) { unavailable(); }
void spmv_csr(std::size_t, const std::int64_t*, const std::int64_t*, const double*, const double*,
              double*) {
  unavailable();
}

}  // namespace ppsolve::kernels::avx2

#endif
