#pragma once

// Data-parallel inner loops over real doubles. Every kernel has a scalar
// reference version and an AVX2/FMA version; the dispatcher chooses one at
// runtime from CPUID, and PPSOLVE_SIMD=scalar forces the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ppsolve::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// ISA the dispatcher currently routes to.
Isa active_isa();

/// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

/// Override the dispatch target (tests and benchmarks). Throws if the
/// requested ISA is unavailable.
void set_isa(Isa isa);

double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
/// y = A x for a CSR matrix with int64 offsets and column indices.
void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double squared_norm(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
void spmv_csr(std::size_t rows, const std::int64_t* row_ptr, const std::int64_t* col_idx,
              const double* values, const double* x, double* y);
}  // namespace avx2

}  // namespace ppsolve::kernels
