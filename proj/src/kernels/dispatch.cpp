#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ppsolve/kernels.hpp"

namespace ppsolve::kernels {

namespace {

bool detect_avx2() {
#if defined(PPSOLVE_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("PPSOLVE_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return detect_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool avx2_available() {
  static const bool ok = detect_avx2();
  return ok;
}

void set_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_available()) throw std::runtime_error("AVX2 kernels unavailable on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

double dot(const double* x, const double* y, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::dot(x, y, n) : scalar::dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(a, x, y, n);
  else
    scalar::axpy(a, x, y, n);
}

double squared_norm(const double* x, std::size_t n) {
  return active_isa() == Isa::avx2 ? avx2::squared_norm(x, n) : scalar::squared_norm(x, n);
}

void scale(double a, double* x, std::size_t n) {
  if (active_isa() == Isa::avx2)
    avx2::scale(a, x, n);
  else
    scalar::scale(a, x, n);
}

void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y) {
  if (active_isa() == Isa::avx2)
    avx2::spmv_csr(rows, row_ptr, col_idx, values, x, y);
  else
    scalar::spmv_csr(rows, row_ptr, col_idx, values, x, y);
}

}  // namespace ppsolve::kernels
