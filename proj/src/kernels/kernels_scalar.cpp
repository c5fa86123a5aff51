#include "ppsolve/kernels.hpp"

namespace ppsolve::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double squared_norm(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
    y[i] = s;
  }
}

}  // namespace ppsolve::kernels::scalar
