#pragma once

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "bordered.hpp"
#include "dense_la.hpp"

namespace sgep {

/// S V_k = V_{k+1} Hbar_k with V_{k+1} orthonormal in a semi-inner product.
/// When `exact` is set the last basis column is zero and the last row of
/// the Hessenberg matrix vanishes: span(V_k) is invariant.
struct ArnoldiDecomposition {
  DenseMatrix basis; // size x (steps + 1)
  DenseMatrix hess;  // (steps + 1) x steps
  InnerProduct inner;
  Index steps = 0;
  bool exact = false;

  /// Leading steps x steps block of hess.
  DenseMatrix square_hess() const { return hess.block(0, 0, steps, steps); }
  /// The first `steps` basis vectors.
  DenseMatrix krylov_basis() const { return basis.block(0, 0, basis.nrows(), steps); }
};

/// Relative size of h_{i+1,i} below which the iteration is treated as
/// having found an invariant subspace.
inline constexpr double arnoldi_breakdown_tol = 1e-13;

/// Semi-inner-product Arnoldi on a shift-and-invert operator. Classical
/// Gram-Schmidt with one full reorthogonalization pass.
inline ArnoldiDecomposition arnoldi_run(const ShiftInvertOperator& s, std::span<const Scalar> v0, const InnerProduct& ip,
                                        Index steps, std::ostream* trace = nullptr) {
  const Index n = s.size();
  require_dims(v0.size() == n && ip.size() == n, "arnoldi_run: length mismatch");
  if (steps < 1) throw ArgumentError("arnoldi_run: steps must be positive");
  const double v0norm = ip.norm(v0);
  if (!(v0norm > arnoldi_breakdown_tol * norm2(v0)) || v0norm == 0.0)
    throw NumericalError("arnoldi_run: start vector lies in the seminorm kernel");

  DenseMatrix basis(n, steps + 1);
  DenseMatrix hess(steps + 1, steps);
  for (Index r = 0; r < n; ++r) basis(r, 0) = v0[r] / v0norm;

  Index done = steps;
  bool exact = false;
  Vector coeff(steps);
  for (Index i = 0; i < steps; ++i) {
    Vector w = s.apply(basis.col(i));
    const double wnorm = norm2(w);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j <= i; ++j) coeff[j] = ip.inner(basis.col(j), w);
      for (Index j = 0; j <= i; ++j) {
        hess(j, i) += coeff[j];
        axpy(-coeff[j], basis.col(j), w);
      }
    }
    const double h = ip.norm(w);
    if (wnorm == 0.0 || h <= arnoldi_breakdown_tol * wnorm) {
      done = i + 1;
      exact = true;
      if (trace) *trace << "arnoldi step=" << i + 1 << " breakdown h=" << h << " |w|=" << wnorm << '\n';
      break;
    }
    hess(i + 1, i) = h;
    for (Index r = 0; r < n; ++r) basis(r, i + 1) = w[r] / h;
    if (trace) {
      double defect = 0.0;
      for (Index j = 0; j <= i; ++j) defect = std::max(defect, std::abs(ip.inner(basis.col(j), basis.col(i + 1))));
      double hcol = 0.0;
      for (Index j = 0; j <= i + 1; ++j) hcol += std::norm(hess(j, i));
      char buf[160];
      std::snprintf(buf, sizeof buf, "arnoldi step=%zu h_col_norm=%.6e h_sub=%.6e orth_defect=%.3e\n", i + 1,
                    std::sqrt(hcol), h, defect);
      *trace << buf;
    }
  }
  ArnoldiDecomposition d{basis.block(0, 0, n, done + 1), hess.block(0, 0, done + 1, done), ip, done, exact};
  if (exact)
    for (Index r = 0; r < n; ++r) d.basis(r, done) = 0.0;
  return d;
}

/// One implicit QR step with a zero shift on the inverted operator (shift
/// at infinity for the pencil). The basis loses one column and is
/// multiplied by S, which removes nullspace components.
inline ArnoldiDecomposition implicit_restart_infinity(const ArnoldiDecomposition& d) {
  const Index k = d.steps;
  if (k < 2) throw ArgumentError("implicit_restart_infinity: needs at least two Arnoldi steps");
  const DenseQR f = qr(d.hess);                           // (k+1) x k = Q R
  DenseMatrix basis = d.basis * f.Q;                      // n x k
  DenseMatrix g = f.R * f.Q.block(0, 0, k, k - 1);        // k x (k-1)
  for (Index j = 0; j < k - 1; ++j)
    for (Index i = j + 2; i < k; ++i) g(i, j) = 0.0;

  // diagonal unitary similarity making the subdiagonal real nonnegative
  Vector d_phase(k, Scalar{1.0});
  for (Index j = 0; j + 1 < k; ++j) {
    const Scalar sub = g(j + 1, j);
    const double a = std::abs(sub);
    d_phase[j + 1] = a == 0.0 ? d_phase[j] : d_phase[j] * (sub / a);
  }
  for (Index j = 0; j < k - 1; ++j)
    for (Index i = 0; i < k; ++i) g(i, j) *= std::conj(d_phase[i]) * d_phase[j];
  for (Index j = 0; j + 1 < k; ++j) g(j + 1, j) = std::abs(g(j + 1, j));
  for (Index j = 0; j < k; ++j)
    for (Index r = 0; r < basis.nrows(); ++r) basis(r, j) *= d_phase[j];

  const double gnorm = g.frobenius();
  const bool exact = gnorm == 0.0 || std::abs(g(k - 1, k - 2)) <= 1e-15 * gnorm;
  return ArnoldiDecomposition{std::move(basis), std::move(g), d.inner, k - 1, exact};
}

struct RitzPair {
  Scalar theta;
  Vector z;             // eigenvector of the square Hessenberg block
  Vector x;             // basis * z (not purified)
  double residual = 0.0; // |h_{k+1,k}| |e_k^T z|
};

/// Ritz pairs of the square Hessenberg block, ordered by ascending
/// residual estimate.
inline std::vector<RitzPair> ritz_pairs(const ArnoldiDecomposition& d) {
  if (d.steps == 0) throw ArgumentError("ritz_pairs: empty decomposition");
  const Index k = d.steps;
  const DenseEig e = hessenberg_eig(d.square_hess());
  const double hsub = std::abs(d.hess(k, k - 1));
  const DenseMatrix vk = d.krylov_basis();
  std::vector<RitzPair> out;
  out.reserve(k);
  for (Index i = 0; i < k; ++i) {
    RitzPair r;
    r.theta = e.eigenvalues[i];
    r.z.assign(e.right_vectors.col(i).begin(), e.right_vectors.col(i).end());
    r.x = vk * std::span<const Scalar>(r.z);
    r.residual = hsub * std::abs(r.z[k - 1]);
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(), [](const RitzPair& a, const RitzPair& b) { return a.residual < b.residual; });
  return out;
}

/// Thrown by purify when the vector lies in the operator's nullspace,
/// i.e. it is a pure infinite-eigenvalue direction.
class InfiniteEigenvectorError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// normalize(S x): strips nullspace (infinite eigenvalue) components.
inline Vector purify(const ShiftInvertOperator& s, std::span<const Scalar> x) {
  const Vector y = s.apply(x);
  const double ny = norm2(y);
  if (ny == 0.0 || ny <= 1e-14 * norm2(x))
    throw InfiniteEigenvectorError("purify: vector lies in the nullspace of the shift-and-invert operator");
  return normalized(y);
}

inline Vector purify(const BorderedPencil& bp, std::span<const Scalar> x) {
  return purify(ShiftInvertOperator(bp, Direction::forward), x);
}

} // namespace sgep
