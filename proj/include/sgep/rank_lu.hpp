#pragma once

#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "permutation.hpp"
#include "sparse_matrix.hpp"

namespace sgep {

/// LU factorization of a (possibly rank deficient) n x m matrix M, n >= m,
/// that grows a border while it factors:
///
///   P [[M, W], [V^*, 0]] = L U,   size n_final = n + ell = m + w.
///
/// Each column of V is alpha e_i for a step i where no pivot of modulus
/// at least tau*alpha was found; W collects alpha e_r for the rows of M
/// that were never chosen as pivots. U ends with the block alpha I.
struct RankLU {
  Permutation P;
  SparseMatrix L; // unit lower triangular, rows in pivot order
  SparseMatrix U; // upper triangular
  SparseMatrix V; // m x ell
  SparseMatrix W; // n x w
  double alpha = 0.0;
  double tau = 0.0;
  std::vector<Index> breakdown_steps;
  std::vector<double> breakdown_pivots; // |mu| of the rejected pivot columns
  Index detected_rank = 0;
  SparseMatrix matrix; // the factored M

  Index nrows() const { return matrix.nrows(); }
  Index ncols() const { return matrix.ncols(); }
  Index size() const { return P.size(); }
  Index border_rows() const { return V.ncols(); }
  Index border_cols() const { return W.ncols(); }
};

/// Assembles [[M, W], [V^*, 0]].
inline SparseMatrix bordered_matrix(const SparseMatrix& m, const SparseMatrix& v, const SparseMatrix& w) {
  require_dims(v.nrows() == m.ncols() && w.nrows() == m.nrows(), "bordered_matrix: border shape mismatch");
  const Index n = m.nrows() + v.ncols();
  require_dims(n == m.ncols() + w.ncols(), "bordered_matrix: bordered matrix is not square");
  std::vector<Triplet> t = m.triplets();
  for (const Triplet& e : w.triplets()) t.push_back({e.row, m.ncols() + e.col, e.value});
  for (const Triplet& e : v.triplets()) t.push_back({m.nrows() + e.col, e.row, std::conj(e.value)});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

inline SparseMatrix bordered_matrix(const RankLU& f) { return bordered_matrix(f.matrix, f.V, f.W); }

/// Left-looking LU with partial pivoting restricted to the current column.
/// Throws ArgumentError for tau outside [0, 1) or an empty matrix, and
/// DimensionError when M has fewer rows than columns.
inline RankLU factor(const SparseMatrix& m, double tau) {
  const Index n = m.nrows(), ncol = m.ncols();
  if (n == 0 || ncol == 0) throw ArgumentError("factor: empty matrix");
  if (n < ncol) throw DimensionError("factor: requires nrows >= ncols (factor the adjoint of wide matrices)");
  if (!(tau >= 0.0 && tau < 1.0)) throw ArgumentError("factor: tau must lie in [0, 1)");

  RankLU f;
  f.tau = tau;
  f.alpha = norm_estimate(m);
  // A zero matrix breaks down in every column; any positive scale works.
  if (f.alpha == 0.0) f.alpha = 1.0;
  const double alpha = f.alpha;
  const double threshold = tau * alpha;

  constexpr Index none = std::numeric_limits<Index>::max();
  const Index max_rows = n + ncol;
  std::vector<Index> pos(max_rows, none); // source row -> pivot step
  std::vector<Index> pivot_src(ncol, none);
  std::vector<std::vector<std::pair<Index, Scalar>>> lcols(ncol); // (source row, multiplier)
  std::vector<std::vector<std::pair<Index, Scalar>>> ucols(ncol); // (step, value), diagonal last

  Vector x(max_rows);
  std::vector<char> in_pattern(max_rows, 0);
  std::vector<Index> touched;
  std::vector<char> queued(ncol, 0);
  std::priority_queue<Index, std::vector<Index>, std::greater<>> steps;
  Index appended = 0;

  for (Index i = 0; i < ncol; ++i) {
    touched.clear();
    auto touch = [&](Index r) {
      if (in_pattern[r]) return;
      in_pattern[r] = 1;
      touched.push_back(r);
      if (pos[r] != none && !queued[pos[r]]) {
        queued[pos[r]] = 1;
        steps.push(pos[r]);
      }
    };
    const auto rows = m.col_rows(i);
    const auto vals = m.col_values(i);
    for (Index p = 0; p < rows.size(); ++p) {
      x[rows[p]] = vals[p];
      touch(rows[p]);
    }
    // apply earlier eliminations in step order (sparse triangular solve)
    auto& ucol = ucols[i];
    while (!steps.empty()) {
      const Index j = steps.top();
      steps.pop();
      queued[j] = 0;
      const Index s = pivot_src[j];
      const Scalar val = x[s];
      if (val == Scalar{}) continue;
      ucol.emplace_back(j, val);
      for (const auto& [r, l] : lcols[j]) {
        touch(r);
        x[r] -= l * val;
      }
    }

    Index best_row = none;
    double best = -1.0;
    for (Index r : touched) {
      if (pos[r] != none) continue;
      const double a = std::abs(x[r]);
      if (a > best || (a == best && r < best_row)) {
        best = a;
        best_row = r;
      }
    }
    if (best_row == none) best = 0.0;

    Scalar pivot;
    if (best < threshold || best == 0.0) {
      // no acceptable pivot: border row alpha e_i^* becomes the pivot row
      const Index s = n + appended++;
      pos[s] = i;
      pivot_src[i] = s;
      pivot = alpha;
      f.breakdown_steps.push_back(i);
      f.breakdown_pivots.push_back(best);
    } else {
      pos[best_row] = i;
      pivot_src[i] = best_row;
      pivot = x[best_row];
    }
    ucol.emplace_back(i, pivot);
    for (Index r : touched) {
      if (pos[r] == none && x[r] != Scalar{}) lcols[i].emplace_back(r, x[r] / pivot);
    }
    std::sort(lcols[i].begin(), lcols[i].end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (Index r : touched) {
      x[r] = Scalar{};
      in_pattern[r] = 0;
    }
  }

  const Index ell = appended;
  const Index nfinal = n + ell;
  std::vector<Index> remaining;
  for (Index r = 0; r < n; ++r)
    if (pos[r] == none) remaining.push_back(r);
  const Index w = remaining.size();
  require_dims(ncol + w == nfinal, "factor: internal dimension inconsistency");
  for (Index j = 0; j < w; ++j) pos[remaining[j]] = ncol + j;

  std::vector<Index> forward(nfinal);
  for (Index s = 0; s < nfinal; ++s) forward[s] = pos[s];
  f.P = Permutation(std::move(forward));

  std::vector<Triplet> lt, ut, vt, wt;
  for (Index j = 0; j < nfinal; ++j) lt.push_back({j, j, 1.0});
  for (Index j = 0; j < ncol; ++j)
    for (const auto& [r, l] : lcols[j]) lt.push_back({pos[r], j, l});
  for (Index j = 0; j < ncol; ++j)
    for (const auto& [row, v] : ucols[j]) ut.push_back({row, j, v});
  for (Index j = 0; j < w; ++j) {
    ut.push_back({ncol + j, ncol + j, alpha});
    wt.push_back({remaining[j], j, alpha});
  }
  for (Index j = 0; j < ell; ++j) vt.push_back({f.breakdown_steps[j], j, alpha});

  f.L = SparseMatrix::from_triplets(nfinal, nfinal, std::move(lt));
  f.U = SparseMatrix::from_triplets(nfinal, nfinal, std::move(ut));
  f.V = SparseMatrix::from_triplets(ncol, ell, std::move(vt));
  f.W = SparseMatrix::from_triplets(n, w, std::move(wt));
  f.detected_rank = ncol - ell;
  f.matrix = m;
  return f;
}

namespace detail {
inline Scalar diagonal_of(const SparseMatrix& u, Index j) {
  const auto rows = u.col_rows(j);
  if (rows.empty() || rows.back() != j) throw NumericalError("rank_lu: zero diagonal entry in U");
  return u.col_values(j).back();
}
} // namespace detail

/// Solves [[M, W], [V^*, 0]] x = b.
inline Vector solve(const RankLU& f, std::span<const Scalar> b) {
  const Index n = f.size();
  require_dims(b.size() == n, "solve: length mismatch");
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[f.P[i]] = b[i];
  for (Index j = 0; j < n; ++j) {
    const Scalar yj = y[j];
    if (yj == Scalar{}) continue;
    const auto rows = f.L.col_rows(j);
    const auto vals = f.L.col_values(j);
    for (Index p = 0; p < rows.size(); ++p)
      if (rows[p] > j) y[rows[p]] -= vals[p] * yj;
  }
  for (Index j = n; j-- > 0;) {
    y[j] /= detail::diagonal_of(f.U, j);
    const Scalar yj = y[j];
    if (yj == Scalar{}) continue;
    const auto rows = f.U.col_rows(j);
    const auto vals = f.U.col_values(j);
    for (Index p = 0; p + 1 < rows.size(); ++p) y[rows[p]] -= vals[p] * yj;
  }
  return y;
}

/// Solves [[M, W], [V^*, 0]]^* x = b via U^*, L^* and P^T.
inline Vector solve_adjoint(const RankLU& f, std::span<const Scalar> b) {
  const Index n = f.size();
  require_dims(b.size() == n, "solve_adjoint: length mismatch");
  Vector z(b.begin(), b.end());
  for (Index j = 0; j < n; ++j) {
    const auto rows = f.U.col_rows(j);
    const auto vals = f.U.col_values(j);
    Scalar s = z[j];
    for (Index p = 0; p + 1 < rows.size(); ++p) s -= std::conj(vals[p]) * z[rows[p]];
    z[j] = s / std::conj(detail::diagonal_of(f.U, j));
  }
  for (Index j = n; j-- > 0;) {
    const auto rows = f.L.col_rows(j);
    const auto vals = f.L.col_values(j);
    Scalar s = z[j];
    for (Index p = 0; p < rows.size(); ++p)
      if (rows[p] > j) s -= std::conj(vals[p]) * z[rows[p]];
    z[j] = s;
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = z[f.P[i]];
  return x;
}

} // namespace sgep
