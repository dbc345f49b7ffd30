#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "dense_matrix.hpp"
#include "scalar.hpp"

namespace sgep {

struct Triplet {
  Index row;
  Index col;
  Scalar value;
};

/// Compressed sparse column matrix with canonical storage: row indices
/// strictly increasing within each column and no stored exact zeros.
class SparseMatrix {
public:
  SparseMatrix() : col_ptr_(1, 0) {}
  SparseMatrix(Index nrows, Index ncols) : nrows_(nrows), ncols_(ncols), col_ptr_(ncols + 1, 0) {}

  /// Duplicates are summed; entries that sum to exactly zero are dropped.
  static SparseMatrix from_triplets(Index nrows, Index ncols, std::vector<Triplet> entries) {
    for (const Triplet& t : entries)
      require_dims(t.row < nrows && t.col < ncols, "from_triplets: index out of range");
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.col, a.row) < std::tie(b.col, b.row);
    });
    SparseMatrix m(nrows, ncols);
    m.row_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    Index k = 0;
    for (Index j = 0; j < ncols; ++j) {
      while (k < entries.size() && entries[k].col == j) {
        const Index r = entries[k].row;
        Scalar v{};
        while (k < entries.size() && entries[k].col == j && entries[k].row == r) v += entries[k++].value;
        if (v != Scalar{}) {
          m.row_idx_.push_back(r);
          m.values_.push_back(v);
        }
      }
      m.col_ptr_[j + 1] = m.row_idx_.size();
    }
    return m;
  }

  /// Takes ownership of raw CSC arrays, checking every storage invariant.
  static SparseMatrix from_csc(Index nrows, Index ncols, std::vector<Index> col_ptr,
                               std::vector<Index> row_idx, std::vector<Scalar> values) {
    require_dims(col_ptr.size() == ncols + 1, "from_csc: col_ptr length");
    require_dims(col_ptr.front() == 0 && col_ptr.back() == row_idx.size() && row_idx.size() == values.size(),
                 "from_csc: inconsistent array lengths");
    for (Index j = 0; j < ncols; ++j) {
      require_dims(col_ptr[j] <= col_ptr[j + 1], "from_csc: col_ptr decreasing");
      for (Index p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        require_dims(row_idx[p] < nrows, "from_csc: row index out of range");
        require_dims(p == col_ptr[j] || row_idx[p - 1] < row_idx[p], "from_csc: unsorted rows");
        require_dims(values[p] != Scalar{}, "from_csc: stored zero");
      }
    }
    SparseMatrix m(nrows, ncols);
    m.col_ptr_ = std::move(col_ptr);
    m.row_idx_ = std::move(row_idx);
    m.values_ = std::move(values);
    return m;
  }

  static SparseMatrix identity(Index n) {
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
  }

  static SparseMatrix from_dense(const DenseMatrix& d) {
    std::vector<Triplet> t;
    for (Index j = 0; j < d.ncols(); ++j)
      for (Index i = 0; i < d.nrows(); ++i)
        if (d(i, j) != Scalar{}) t.push_back({i, j, d(i, j)});
    return from_triplets(d.nrows(), d.ncols(), std::move(t));
  }

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  Index nnz() const { return values_.size(); }

  std::span<const Index> col_ptr() const { return col_ptr_; }
  std::span<const Index> row_idx() const { return row_idx_; }
  std::span<const Scalar> values() const { return values_; }

  std::span<const Index> col_rows(Index j) const {
    return std::span<const Index>(row_idx_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
  }
  std::span<const Scalar> col_values(Index j) const {
    return std::span<const Scalar>(values_).subspan(col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]);
  }

  /// Entry lookup by binary search within the column.
  Scalar at(Index i, Index j) const {
    const auto rows = col_rows(j);
    const auto it = std::lower_bound(rows.begin(), rows.end(), i);
    if (it == rows.end() || *it != i) return {};
    return values_[col_ptr_[j] + static_cast<Index>(it - rows.begin())];
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (Index j = 0; j < ncols_; ++j)
      for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) t.push_back({row_idx_[p], j, values_[p]});
    return t;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(nrows_, ncols_);
    for (Index j = 0; j < ncols_; ++j)
      for (Index p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d(row_idx_[p], j) = values_[p];
    return d;
  }

  SparseMatrix adjoint() const {
    std::vector<Triplet> t = triplets();
    for (Triplet& e : t) {
      std::swap(e.row, e.col);
      e.value = std::conj(e.value);
    }
    return from_triplets(ncols_, nrows_, std::move(t));
  }

  bool is_real() const {
    return std::all_of(values_.begin(), values_.end(), [](const Scalar& v) { return v.imag() == 0.0; });
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<Scalar> values_;
};

/// M x, summed column by column in storage order.
inline Vector spmv(const SparseMatrix& m, std::span<const Scalar> x) {
  require_dims(x.size() == m.ncols(), "spmv: length mismatch");
  Vector y(m.nrows());
  for (Index j = 0; j < m.ncols(); ++j) {
    const Scalar xj = x[j];
    if (xj == Scalar{}) continue;
    const auto rows = m.col_rows(j);
    const auto vals = m.col_values(j);
    for (Index p = 0; p < rows.size(); ++p) y[rows[p]] += vals[p] * xj;
  }
  return y;
}

/// M^* y without materializing the adjoint.
inline Vector spmv_adjoint(const SparseMatrix& m, std::span<const Scalar> y) {
  require_dims(y.size() == m.nrows(), "spmv_adjoint: length mismatch");
  Vector x(m.ncols());
  for (Index j = 0; j < m.ncols(); ++j) {
    const auto rows = m.col_rows(j);
    const auto vals = m.col_values(j);
    Scalar s{};
    for (Index p = 0; p < rows.size(); ++p) s += std::conj(vals[p]) * y[rows[p]];
    x[j] = s;
  }
  return x;
}

/// One-norm (maximum absolute column sum). This is the border scale of
/// the rank-detecting factorization.
inline double norm_estimate(const SparseMatrix& m) {
  double best = 0.0;
  for (Index j = 0; j < m.ncols(); ++j) {
    double s = 0.0;
    for (const Scalar& v : m.col_values(j)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

/// a + s*b for matrices of equal shape.
inline SparseMatrix add_scaled(const SparseMatrix& a, Scalar s, const SparseMatrix& b) {
  require_dims(a.nrows() == b.nrows() && a.ncols() == b.ncols(), "add_scaled: shape mismatch");
  std::vector<Triplet> t = a.triplets();
  t.reserve(a.nnz() + b.nnz());
  for (const Triplet& e : b.triplets()) t.push_back({e.row, e.col, s * e.value});
  return SparseMatrix::from_triplets(a.nrows(), a.ncols(), std::move(t));
}

inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  require_dims(a.ncols() == b.nrows(), "multiply: inner dimension mismatch");
  std::vector<Triplet> t;
  Vector work(a.nrows());
  std::vector<char> mark(a.nrows(), 0);
  std::vector<Index> pattern;
  for (Index j = 0; j < b.ncols(); ++j) {
    pattern.clear();
    const auto brows = b.col_rows(j);
    const auto bvals = b.col_values(j);
    for (Index q = 0; q < brows.size(); ++q) {
      const auto arows = a.col_rows(brows[q]);
      const auto avals = a.col_values(brows[q]);
      for (Index p = 0; p < arows.size(); ++p) {
        if (!mark[arows[p]]) {
          mark[arows[p]] = 1;
          pattern.push_back(arows[p]);
        }
        work[arows[p]] += avals[p] * bvals[q];
      }
    }
    for (Index r : pattern) {
      t.push_back({r, j, work[r]});
      work[r] = {};
      mark[r] = 0;
    }
  }
  return SparseMatrix::from_triplets(a.nrows(), b.ncols(), std::move(t));
}

} // namespace sgep
