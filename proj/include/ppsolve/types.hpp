#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace ppsolve {

using index_t = std::int64_t;
using complex_t = std::complex<double>;

/// The two scalar fields the library is instantiated for.
template <typename T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, complex_t>;

template <typename T>
inline constexpr bool is_complex_v = std::is_same_v<T, complex_t>;

template <typename T>
using Vector = std::vector<T>;

inline double conj(double x) { return x; }
inline complex_t conj(const complex_t& z) { return std::conj(z); }

inline double real_part(double x) { return x; }
inline double real_part(const complex_t& z) { return z.real(); }

inline double abs2(double x) { return x * x; }
inline double abs2(const complex_t& z) { return std::norm(z); }

/// Raised when operands disagree in shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace ppsolve
