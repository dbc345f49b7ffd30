#pragma once

#include <memory>
#include <random>

#include "rank_lu.hpp"
#include "sparse_matrix.hpp"

namespace sgep {

/// The pencil A - lambda B, possibly rectangular.
struct Pencil {
  SparseMatrix A;
  SparseMatrix B;

  Pencil() = default;
  Pencil(SparseMatrix a, SparseMatrix b) : A(std::move(a)), B(std::move(b)) {
    require_dims(A.nrows() == B.nrows() && A.ncols() == B.ncols(), "Pencil: A and B differ in shape");
  }
  Index nrows() const { return A.nrows(); }
  Index ncols() const { return A.ncols(); }
  bool square() const { return nrows() == ncols(); }
};

/// Regularized pencil [[A, W], [V^*, 0]] - lambda [[B, 0], [0, 0]] together
/// with the factorization of its value at the shift. Right vectors have
/// ncols() leading entries followed by border_cols() border entries; left
/// vectors have nrows() leading entries followed by border_rows().
class BorderedPencil {
public:
  BorderedPencil(Pencil base, Scalar shift, RankLU lu, bool adjoint_factored)
      : base_(std::move(base)), shift_(shift), lu_(std::move(lu)), adjoint_factored_(adjoint_factored) {
    if (adjoint_factored_) {
      V_ = lu_.W;
      W_ = lu_.V;
    } else {
      V_ = lu_.V;
      W_ = lu_.W;
    }
    normal_rank_ = lu_.detected_rank;
  }

  const Pencil& base() const { return base_; }
  const SparseMatrix& V() const { return V_; }
  const SparseMatrix& W() const { return W_; }
  const RankLU& lu() const { return lu_; }
  Scalar shift() const { return shift_; }
  Index normal_rank() const { return normal_rank_; }
  bool adjoint_factored() const { return adjoint_factored_; }

  Index nrows() const { return base_.nrows(); }
  Index ncols() const { return base_.ncols(); }
  Index border_rows() const { return V_.ncols(); } // ell
  Index border_cols() const { return W_.ncols(); } // w
  Index size() const { return nrows() + border_rows(); }

  SparseMatrix bordered_a() const { return bordered_matrix(base_.A, V_, W_); }
  SparseMatrix bordered_b() const {
    return SparseMatrix::from_triplets(size(), size(), base_.B.triplets());
  }

  /// [[A, W], [V^*, 0]] x
  Vector apply_a(std::span<const Scalar> x) const { return apply_block(base_.A, x, true); }
  /// [[A, W], [V^*, 0]]^* y
  Vector apply_a_adjoint(std::span<const Scalar> y) const { return apply_block_adjoint(base_.A, y, true); }
  /// [[B, 0], [0, 0]] x
  Vector apply_b(std::span<const Scalar> x) const { return apply_block(base_.B, x, false); }
  Vector apply_b_adjoint(std::span<const Scalar> y) const { return apply_block_adjoint(base_.B, y, false); }

  /// (A_hat - shift B_hat)^{-1} b
  Vector solve_shifted(std::span<const Scalar> b) const {
    return adjoint_factored_ ? solve_adjoint(lu_, b) : solve(lu_, b);
  }
  /// (A_hat - shift B_hat)^{-*} b
  Vector solve_shifted_adjoint(std::span<const Scalar> b) const {
    return adjoint_factored_ ? solve(lu_, b) : solve_adjoint(lu_, b);
  }

private:
  Vector apply_block(const SparseMatrix& top, std::span<const Scalar> x, bool with_border) const {
    require_dims(x.size() == size(), "BorderedPencil: vector length mismatch");
    const Index m = ncols(), n = nrows();
    Vector y(size());
    const Vector t = spmv(top, x.first(m));
    std::copy(t.begin(), t.end(), y.begin());
    if (!with_border) return y;
    const Vector wx = spmv(W_, x.subspan(m));
    for (Index i = 0; i < n; ++i) y[i] += wx[i];
    const Vector vx = spmv_adjoint(V_, x.first(m));
    std::copy(vx.begin(), vx.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
    return y;
  }

  Vector apply_block_adjoint(const SparseMatrix& top, std::span<const Scalar> y, bool with_border) const {
    require_dims(y.size() == size(), "BorderedPencil: vector length mismatch");
    const Index m = ncols(), n = nrows();
    Vector x(size());
    const Vector t = spmv_adjoint(top, y.first(n));
    std::copy(t.begin(), t.end(), x.begin());
    if (!with_border) return x;
    const Vector vy = spmv(V_, y.subspan(n));
    for (Index i = 0; i < m; ++i) x[i] += vy[i];
    const Vector wy = spmv_adjoint(W_, y.first(n));
    std::copy(wy.begin(), wy.end(), x.begin() + static_cast<std::ptrdiff_t>(m));
    return x;
  }

  Pencil base_;
  Scalar shift_;
  RankLU lu_;
  bool adjoint_factored_;
  SparseMatrix V_, W_;
  Index normal_rank_ = 0;
};

/// Factors A - sigma B with border detection. Wide pencils factor the
/// adjoint and exchange the roles of V and W.
inline BorderedPencil regularize(const Pencil& p, Scalar sigma, double tau) {
  const SparseMatrix shifted = add_scaled(p.A, -sigma, p.B);
  if (p.nrows() >= p.ncols()) return BorderedPencil(p, sigma, factor(shifted, tau), false);
  return BorderedPencil(p, sigma, factor(shifted.adjoint(), tau), true);
}

/// Rectangular entry point; same pipeline as regularize.
inline BorderedPencil make_square_rectangular(const Pencil& p, Scalar sigma, double tau) {
  if (p.square()) throw ArgumentError("make_square_rectangular: pencil is square");
  return regularize(p, sigma, tau);
}

enum class Direction {
  forward,    // S = (A_hat - sigma B_hat)^{-1} B_hat, acts on right vectors
  adjoint,    // S^* = B_hat^* (A_hat - sigma B_hat)^{-*}
  transposed, // shift-invert of the adjoint pencil, acts on left vectors
};

/// Shift-and-invert operator of a bordered pencil. The bordered pencil
/// must outlive the operator.
class ShiftInvertOperator {
public:
  ShiftInvertOperator(const BorderedPencil& bp, Direction dir) : bp_(&bp), dir_(dir) {}

  const BorderedPencil& bordered() const { return *bp_; }
  Direction direction() const { return dir_; }
  Index size() const { return bp_->size(); }

  /// Number of leading (non-border) coordinates of the vectors acted on.
  Index leading() const { return dir_ == Direction::transposed ? bp_->nrows() : bp_->ncols(); }

  Vector apply(std::span<const Scalar> v) const {
    require_dims(v.size() == size(), "apply_shift_invert: length mismatch");
    switch (dir_) {
    case Direction::forward:
      return bp_->solve_shifted(bp_->apply_b(v));
    case Direction::adjoint:
      return bp_->apply_b_adjoint(bp_->solve_shifted_adjoint(v));
    case Direction::transposed:
      return bp_->solve_shifted_adjoint(bp_->apply_b_adjoint(v));
    }
    return {};
  }

private:
  const BorderedPencil* bp_;
  Direction dir_;
};

inline Vector apply_shift_invert(const ShiftInvertOperator& s, std::span<const Scalar> v) { return s.apply(v); }

enum class InnerProductKind { identity_block, b_block };

/// Semi-inner product x^* P y with P = diag(I, 0) or diag(B, 0).
class InnerProduct {
public:
  InnerProduct(InnerProductKind kind, Index leading, Index size, std::shared_ptr<const SparseMatrix> b = nullptr)
      : kind_(kind), leading_(leading), size_(size), b_(std::move(b)) {
    require_dims(leading_ <= size_, "InnerProduct: leading block larger than vector");
    if (kind_ == InnerProductKind::b_block)
      require_dims(b_ && b_->nrows() == leading_ && b_->ncols() == leading_, "InnerProduct: B block shape");
  }

  /// Euclidean product on the first `leading` coordinates.
  static InnerProduct identity_block(Index leading, Index size) {
    return InnerProduct(InnerProductKind::identity_block, leading, size);
  }

  InnerProductKind kind() const { return kind_; }
  Index leading() const { return leading_; }
  Index size() const { return size_; }

  Scalar inner(std::span<const Scalar> x, std::span<const Scalar> y) const {
    require_dims(x.size() == size_ && y.size() == size_, "InnerProduct: length mismatch");
    if (kind_ == InnerProductKind::identity_block) return dot(x.first(leading_), y.first(leading_));
    const Vector by = spmv(*b_, y.first(leading_));
    return dot(x.first(leading_), by);
  }

  double norm(std::span<const Scalar> x) const {
    if (kind_ == InnerProductKind::identity_block) {
      require_dims(x.size() == size_, "InnerProduct: length mismatch");
      return norm2(x.first(leading_));
    }
    return std::sqrt(std::max(0.0, inner(x, x).real()));
  }

private:
  InnerProductKind kind_;
  Index leading_;
  Index size_;
  std::shared_ptr<const SparseMatrix> b_;
};

/// Inner-product descriptor for the right (forward) or left (transposed)
/// Krylov space of a bordered pencil. The B-weighted form requires a
/// Hermitian positive semi-definite B.
inline InnerProduct p_matrix(const BorderedPencil& bp, InnerProductKind kind, Direction side = Direction::forward) {
  const Index leading = side == Direction::transposed ? bp.nrows() : bp.ncols();
  if (kind == InnerProductKind::identity_block) return InnerProduct::identity_block(leading, bp.size());

  const SparseMatrix& b = bp.base().B;
  if (b.nrows() != b.ncols()) throw ArgumentError("p_matrix: B-weighted product needs a square B");
  double bmax = 0.0;
  for (const Scalar& v : b.values()) bmax = std::max(bmax, std::abs(v));
  for (const Triplet& e : b.triplets())
    if (std::abs(e.value - std::conj(b.at(e.col, e.row))) > 1e-12 * bmax)
      throw ArgumentError("p_matrix: B is not Hermitian, the inner product is not well defined");
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 16; ++trial) {
    Vector x(b.ncols());
    for (Scalar& v : x) v = {g(rng), g(rng)};
    x = normalized(x);
    const Vector bx = spmv(b, x);
    if (dot(x, bx).real() < -1e-12 * std::max(bmax, 1.0))
      throw ArgumentError("p_matrix: B is indefinite, the inner product is not well defined");
  }
  return InnerProduct(InnerProductKind::b_block, leading, bp.size(), std::make_shared<const SparseMatrix>(b));
}

} // namespace sgep
