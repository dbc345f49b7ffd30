#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sparse_matrix.hpp"

namespace sgep {

class MatrixMarketError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
} // namespace detail

/// Reads `coordinate` matrices with field real, integer or complex and
/// symmetry general. Indices on disk are 1-based; duplicates are summed.
inline SparseMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MatrixMarketError("matrix market: empty input");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix")
    throw MatrixMarketError("matrix market: missing banner");
  if (detail::lower(format) != "coordinate") throw MatrixMarketError("matrix market: only coordinate format supported");
  field = detail::lower(field);
  const bool is_complex = field == "complex";
  if (!is_complex && field != "real" && field != "integer")
    throw MatrixMarketError("matrix market: unsupported field '" + field + "'");
  if (detail::lower(symmetry) != "general") throw MatrixMarketError("matrix market: only general symmetry supported");

  do {
    if (!std::getline(in, line)) throw MatrixMarketError("matrix market: missing size line");
  } while (line.empty() || line[0] == '%');

  long long nrows = 0, ncols = 0, nnz = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> nrows >> ncols >> nnz) || nrows < 0 || ncols < 0 || nnz < 0)
      throw MatrixMarketError("matrix market: bad size line");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<Index>(nnz));
  for (long long k = 0; k < nnz;) {
    if (!std::getline(in, line)) throw MatrixMarketError("matrix market: truncated entry list");
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    long long i = 0, j = 0;
    double re = 0.0, im = 0.0;
    if (!(es >> i >> j >> re)) throw MatrixMarketError("matrix market: bad entry line");
    if (is_complex && !(es >> im)) throw MatrixMarketError("matrix market: missing imaginary part");
    if (i < 1 || j < 1 || i > nrows || j > ncols) throw MatrixMarketError("matrix market: index out of range");
    t.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), Scalar{re, im}});
    ++k;
  }
  return SparseMatrix::from_triplets(static_cast<Index>(nrows), static_cast<Index>(ncols), std::move(t));
}

inline SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MatrixMarketError("cannot open '" + path + "'");
  return read_matrix_market(f);
}

/// Writes `real general` when every entry is real, otherwise `complex
/// general`. Values use 17 significant digits so a read reproduces them.
inline void write_matrix_market(std::ostream& out, const SparseMatrix& m) {
  const bool real = m.is_real();
  out << "%%MatrixMarket matrix coordinate " << (real ? "real" : "complex") << " general\n";
  out << m.nrows() << ' ' << m.ncols() << ' ' << m.nnz() << '\n';
  char buf[96];
  for (const Triplet& e : m.triplets()) {
    if (real)
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", e.row + 1, e.col + 1, e.value.real());
    else
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g %.17g\n", e.row + 1, e.col + 1, e.value.real(), e.value.imag());
    out << buf;
  }
}

inline void write_matrix_market(const std::string& path, const SparseMatrix& m) {
  std::ofstream f(path);
  if (!f) throw MatrixMarketError("cannot write '" + path + "'");
  write_matrix_market(f, m);
  if (!f) throw MatrixMarketError("write failed for '" + path + "'");
}

} // namespace sgep
