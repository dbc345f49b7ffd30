#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "scalar.hpp"

namespace sgep {

/// Column-major complex dense matrix. Used for Krylov bases, Hessenberg
/// matrices and the small projected problems.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(Index nrows, Index ncols)
      : nrows_(nrows), ncols_(ncols), values_(nrows * ncols) {}

  static DenseMatrix identity(Index n) {
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Builds from row-major nested initializer data (test convenience).
  static DenseMatrix from_rows(const std::vector<std::vector<Scalar>>& rows) {
    const Index r = rows.size();
    const Index c = r ? rows.front().size() : 0;
    DenseMatrix m(r, c);
    for (Index i = 0; i < r; ++i) {
      require_dims(rows[i].size() == c, "from_rows: ragged input");
      for (Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  bool empty() const { return values_.empty(); }

  Scalar& operator()(Index i, Index j) { return values_[i + j * nrows_]; }
  const Scalar& operator()(Index i, Index j) const { return values_[i + j * nrows_]; }

  std::span<Scalar> col(Index j) { return {values_.data() + j * nrows_, nrows_}; }
  std::span<const Scalar> col(Index j) const { return {values_.data() + j * nrows_, nrows_}; }

  std::span<const Scalar> values() const { return values_; }
  std::span<Scalar> values() { return values_; }

  void set_col(Index j, std::span<const Scalar> v) {
    require_dims(v.size() == nrows_, "set_col: length mismatch");
    std::copy(v.begin(), v.end(), col(j).begin());
  }

  DenseMatrix block(Index r0, Index c0, Index nr, Index nc) const {
    require_dims(r0 + nr <= nrows_ && c0 + nc <= ncols_, "block: out of range");
    DenseMatrix b(nr, nc);
    for (Index j = 0; j < nc; ++j)
      for (Index i = 0; i < nr; ++i) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  DenseMatrix adjoint() const {
    DenseMatrix t(ncols_, nrows_);
    for (Index j = 0; j < ncols_; ++j)
      for (Index i = 0; i < nrows_; ++i) t(j, i) = std::conj((*this)(i, j));
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Scalar& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  double norm1() const {
    double m = 0.0;
    for (Index j = 0; j < ncols_; ++j) {
      double s = 0.0;
      for (Index i = 0; i < nrows_; ++i) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }

  double frobenius() const { return norm2(values_); }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Scalar> values_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  require_dims(a.ncols() == b.nrows(), "matmul: inner dimension mismatch");
  DenseMatrix c(a.nrows(), b.ncols());
  for (Index j = 0; j < b.ncols(); ++j)
    for (Index k = 0; k < a.ncols(); ++k) {
      const Scalar bkj = b(k, j);
      if (bkj == Scalar{}) continue;
      for (Index i = 0; i < a.nrows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

inline DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_dims(a.nrows() == b.nrows() && a.ncols() == b.ncols(), "sub: shape mismatch");
  DenseMatrix c = a;
  for (Index k = 0; k < c.values().size(); ++k) c.values()[k] -= b.values()[k];
  return c;
}

inline DenseMatrix operator*(Scalar s, const DenseMatrix& a) {
  DenseMatrix c = a;
  for (Scalar& v : c.values()) v *= s;
  return c;
}

inline Vector operator*(const DenseMatrix& a, std::span<const Scalar> x) {
  require_dims(a.ncols() == x.size(), "matvec: length mismatch");
  Vector y(a.nrows());
  for (Index j = 0; j < a.ncols(); ++j) axpy(x[j], a.col(j), y);
  return y;
}

/// a^* x without forming the adjoint.
inline Vector adjoint_times(const DenseMatrix& a, std::span<const Scalar> x) {
  require_dims(a.nrows() == x.size(), "adjoint matvec: length mismatch");
  Vector y(a.ncols());
  for (Index j = 0; j < a.ncols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

} // namespace sgep
