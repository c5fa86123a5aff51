#include "ppsolve/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace ppsolve {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

template <Scalar T>
SparseMatrix<T> read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw MatrixMarketError(1, "empty input");
  ++lineno;
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw MatrixMarketError(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw MatrixMarketError(lineno, "unsupported object '" + object + "'");
  if (format != "coordinate") throw MatrixMarketError(lineno, "only coordinate format is supported");
  const bool is_cplx = field == "complex";
  if (!is_cplx && field != "real" && field != "integer" && field != "double")
    throw MatrixMarketError(lineno, "unsupported field '" + field + "'");
  if (is_cplx && !is_complex_v<T>) throw MatrixMarketError(lineno, "complex file read into a real matrix");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "skew-symmetric" && symmetry != "hermitian")
    throw MatrixMarketError(lineno, "unsupported symmetry '" + symmetry + "'");
  if (symmetry == "hermitian" && !is_cplx) throw MatrixMarketError(lineno, "hermitian symmetry needs a complex field");

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw MatrixMarketError(lineno, "malformed size line");
    break;
  }
  if (rows < 0) throw MatrixMarketError(lineno, "missing size line");
  if (symmetry != "general" && rows != cols) throw MatrixMarketError(lineno, "symmetric storage needs a square matrix");

  std::vector<Triplet<T>> trips;
  trips.reserve(static_cast<std::size_t>(symmetry == "general" ? nnz : 2 * nnz));
  long long read = 0;
  while (read < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    long long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(es >> i >> j >> re)) throw MatrixMarketError(lineno, "malformed entry");
    if (is_cplx && !(es >> im)) throw MatrixMarketError(lineno, "complex entry needs two values");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw MatrixMarketError(lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
    T v;
    if constexpr (is_complex_v<T>)
      v = T(re, im);
    else
      v = re;
    trips.push_back({i - 1, j - 1, v});
    if (i != j) {
      if (symmetry == "symmetric") trips.push_back({j - 1, i - 1, v});
      if (symmetry == "skew-symmetric") trips.push_back({j - 1, i - 1, -v});
      if (symmetry == "hermitian") trips.push_back({j - 1, i - 1, conj(v)});
    } else if (symmetry == "skew-symmetric") {
      throw MatrixMarketError(lineno, "skew-symmetric file stores a diagonal entry");
    }
    ++read;
  }
  if (read != nnz)
    throw MatrixMarketError(lineno, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(read));
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] != '%' && line.find_first_not_of(" \t\r") != std::string::npos)
      throw MatrixMarketError(lineno, "more entries than declared");
  }
  try {
    return SparseMatrix<T>::from_triplets(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                                          std::move(trips));
  } catch (const std::invalid_argument& e) {
    throw MatrixMarketError(0, e.what());
  }
}

template <Scalar T>
SparseMatrix<T> load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError(0, "cannot open '" + path + "'");
  try {
    return read_matrix_market<T>(in);
  } catch (const MatrixMarketError& e) {
    throw MatrixMarketError(e.line(), path + ": " + (e.line() ? std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) : e.what()));
  }
}

template <Scalar T>
void write_matrix_market(std::ostream& out, const SparseMatrix<T>& m) {
  out << "%%MatrixMarket matrix coordinate " << (is_complex_v<T> ? "complex" : "real") << " general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  char buf[96];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (index_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      const T v = m.values()[k];
      if constexpr (is_complex_v<T>)
        std::snprintf(buf, sizeof buf, "%zu %lld %.17g %.17g\n", i + 1, static_cast<long long>(m.col_idx()[k] + 1),
                      v.real(), v.imag());
      else
        std::snprintf(buf, sizeof buf, "%zu %lld %.17g\n", i + 1, static_cast<long long>(m.col_idx()[k] + 1), v);
      out << buf;
    }
  }
}

template <Scalar T>
void save_matrix_market(const std::string& path, const SparseMatrix<T>& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_matrix_market(out, m);
}

template <Scalar T>
BlockSaddleSystem<T> load_saddle(const std::string& path, std::size_t n) {
  return BlockSaddleSystem<T>::from_matrix(load_matrix_market<T>(path), n);
}

template <Scalar T>
BlockSaddleSystem<T> load_saddle(const std::string& a, const std::string& b, const std::string& c,
                                 const std::string& d) {
  return BlockSaddleSystem<T>(load_matrix_market<T>(a), load_matrix_market<T>(b), load_matrix_market<T>(c),
                              load_matrix_market<T>(d));
}

#define PPSOLVE_INSTANTIATE(T)                                                                             \
  template SparseMatrix<T> read_matrix_market(std::istream&);                                              \
  template SparseMatrix<T> load_matrix_market(const std::string&);                                         \
  template void write_matrix_market(std::ostream&, const SparseMatrix<T>&);                                \
  template void save_matrix_market(const std::string&, const SparseMatrix<T>&);                            \
  template BlockSaddleSystem<T> load_saddle(const std::string&, std::size_t);                              \
  template BlockSaddleSystem<T> load_saddle(const std::string&, const std::string&, const std::string&,    \
                                            const std::string&);

PPSOLVE_INSTANTIATE(double)
PPSOLVE_INSTANTIATE(complex_t)

#undef PPSOLVE_INSTANTIATE

}  // namespace ppsolve
