#pragma once

#include <cmath>
#include <span>

#include "ppsolve/kernels.hpp"
#include "ppsolve/types.hpp"

namespace ppsolve {

/// Inner product x^H y (conjugates the first argument).
template <Scalar T>
T dot(std::span<const T> x, std::span<const T> y) {
  require_dims(x.size() == y.size(), "dot: length mismatch");
  if constexpr (std::is_same_v<T, double>) {
    return kernels::dot(x.data(), y.data(), x.size());
  } else {
    T s{};
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
  }
}

template <Scalar T>
double norm2(std::span<const T> x) {
  if constexpr (std::is_same_v<T, double>) {
    return std::sqrt(kernels::squared_norm(x.data(), x.size()));
  } else {
    // Interleaved re/im pairs have the same squared norm as a real vector.
    return std::sqrt(kernels::squared_norm(reinterpret_cast<const double*>(x.data()), 2 * x.size()));
  }
}

/// y += a x
template <Scalar T>
void axpy(T a, std::span<const T> x, std::span<T> y) {
  require_dims(x.size() == y.size(), "axpy: length mismatch");
  if constexpr (std::is_same_v<T, double>) {
    kernels::axpy(a, x.data(), y.data(), x.size());
  } else if (a.imag() == 0.0) {
    kernels::axpy(a.real(), reinterpret_cast<const double*>(x.data()), reinterpret_cast<double*>(y.data()),
                  2 * x.size());
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
  }
}

template <Scalar T>
void scale(T a, std::span<T> x) {
  if constexpr (std::is_same_v<T, double>) {
    kernels::scale(a, x.data(), x.size());
  } else if (a.imag() == 0.0) {
    kernels::scale(a.real(), reinterpret_cast<double*>(x.data()), 2 * x.size());
  } else {
    for (auto& v : x) v *= a;
  }
}

/// Sum of squared magnitudes.
template <Scalar T>
double abs2_sum(std::span<const T> x) {
  if constexpr (std::is_same_v<T, double>)
    return kernels::squared_norm(x.data(), x.size());
  else
    return kernels::squared_norm(reinterpret_cast<const double*>(x.data()), 2 * x.size());
}

template <Scalar T>
double norm2(const Vector<T>& x) {
  return norm2(std::span<const T>(x));
}

/// a - b, elementwise.
template <Scalar T>
Vector<T> subtract(std::span<const T> a, std::span<const T> b) {
  require_dims(a.size() == b.size(), "subtract: length mismatch");
  Vector<T> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace ppsolve
