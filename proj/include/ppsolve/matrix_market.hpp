#pragma once

#include <iosfwd>
#include <string>

#include "ppsolve/splitting.hpp"

namespace ppsolve {

/// Malformed Matrix Market input; line() is 1-based, 0 when not tied to a line.
class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Coordinate format, real/integer/complex field, general/symmetric/
/// skew-symmetric/hermitian symmetry. Symmetric storage is expanded.
template <Scalar T>
SparseMatrix<T> read_matrix_market(std::istream& in);
template <Scalar T>
SparseMatrix<T> load_matrix_market(const std::string& path);

/// Writes general coordinate format with 17 significant digits, so that
/// reading back reproduces every value exactly.
template <Scalar T>
void write_matrix_market(std::ostream& out, const SparseMatrix<T>& m);
template <Scalar T>
void save_matrix_market(const std::string& path, const SparseMatrix<T>& m);

/// One square file sliced at row/column n.
template <Scalar T>
BlockSaddleSystem<T> load_saddle(const std::string& path, std::size_t n);
/// Four block files.
template <Scalar T>
BlockSaddleSystem<T> load_saddle(const std::string& a, const std::string& b, const std::string& c,
                                 const std::string& d);

}  // namespace ppsolve
