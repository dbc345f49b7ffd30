#pragma once

#include <chrono>
#include <cstdint>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "arnoldi.hpp"

namespace sgep {

enum class Label { True, Spurious, Infinite };

inline const char* label_name(Label l) {
  switch (l) {
  case Label::True:
    return "True";
  case Label::Spurious:
    return "Spurious";
  case Label::Infinite:
    return "Infinite";
  }
  return "?";
}

/// Approximate eigenvalue with purified right and left Ritz vectors. In
/// one-sided mode y is empty and the y fields are NaN.
struct EigenTriplet {
  Scalar lambda;
  Scalar theta;          // eigenvalue of the inverted operator
  bool infinite = false;
  Vector x;
  Vector y;
  double x_border_norm = 0.0;
  double y_border_norm = 0.0;
  double residual_right = 0.0;  // |S x - theta x|
  double residual_left = 0.0;   // |T y - conj(theta) y|
  double residual_estimate = 0.0; // Arnoldi estimate (one-sided), else residual_right
  Label label = Label::Spurious;
  bool sides_disagree = false;  // exactly one of the border norms below threshold
  bool ambiguous_pairing = false;

  bool has_left() const { return !y.empty(); }
};

enum class SideMode { automatic, two_sided, one_sided };

/// krylov: shift-and-invert Arnoldi. dense: QZ on the whole bordered pencil,
/// for small problems where the shifted bordered matrix may be too
/// ill-conditioned to invert.
enum class SolveMethod { krylov, dense };

inline constexpr Index dense_method_limit = 2000;

struct SolverConfig {
  Scalar sigma{0.0};
  double tau = 1e-12;
  Index krylov_steps = 20;
  Index implicit_restarts = 1;
  double classify_threshold = 1e-6;
  std::uint64_t seed = 42;
  InnerProductKind p_kind = InnerProductKind::identity_block;
  SideMode mode = SideMode::automatic;
  SolveMethod method = SolveMethod::krylov;

  void validate() const {
    if (krylov_steps == 0) throw ArgumentError("config: krylov_steps must be positive");
    if (!(krylov_steps > implicit_restarts)) throw ArgumentError("config: krylov_steps must exceed implicit_restarts");
    if (!(classify_threshold > 0.0 && classify_threshold < 1.0))
      throw ArgumentError("config: classify_threshold must lie in (0, 1)");
    if (!(tau >= 0.0 && tau < 1.0)) throw ArgumentError("config: tau must lie in [0, 1)");
    if (!std::isfinite(sigma.real()) || !std::isfinite(sigma.imag())) throw ArgumentError("config: shift not finite");
  }
};

struct SolveResult {
  std::vector<EigenTriplet> triplets;
  Index border_rows = 0; // ell
  Index border_cols = 0; // w
  Index normal_rank = 0;
  Index forward_dim = 0; // Krylov dimension after restarts
  Index left_dim = 0;
  Index restarts_applied = 0;
  bool one_sided = false;
  double alpha = 0.0;
  double factor_seconds = 0.0;
  double arnoldi_seconds = 0.0;
  double projection_seconds = 0.0;
};

/// Infinite if flagged, True when both border norms (right only in
/// one-sided mode) fall below the threshold, Spurious otherwise.
inline Label classify(const EigenTriplet& t, double threshold) {
  if (t.infinite) return Label::Infinite;
  double b = t.x_border_norm;
  if (t.has_left()) b = std::max(b, t.y_border_norm);
  return b < threshold ? Label::True : Label::Spurious;
}

namespace detail {

inline Vector random_gaussian(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Scalar& s : v) s = {g(rng), g(rng)};
  return v;
}

/// Pre-purified random start vector; one retry when it falls in the
/// seminorm kernel.
inline Vector start_vector(const ShiftInvertOperator& s, const InnerProduct& ip, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const Vector v = s.apply(random_gaussian(rng, s.size()));
    const double nv = norm2(v);
    if (nv > 0.0 && ip.norm(v) > arnoldi_breakdown_tol * nv) return v;
  }
  throw NumericalError("start vector lies in the seminorm kernel after retry");
}

inline ArnoldiDecomposition krylov_side(const ShiftInvertOperator& s, const InnerProduct& ip, std::mt19937_64& rng,
                                        Index steps, Index restarts, Index& applied, std::ostream* trace) {
  const Vector v0 = start_vector(s, ip, rng);
  if (trace) *trace << "# side=" << (s.direction() == Direction::forward ? "forward" : "left") << '\n';
  ArnoldiDecomposition d = arnoldi_run(s, v0, ip, steps, trace);
  applied = 0;
  while (applied < restarts && d.steps >= 2) {
    // Invariant space: Ritz vectors are exact and purification removes
    // what is left of the nullspace; a restart would drop an eigenvector.
    if (d.exact) break;
    d = implicit_restart_infinity(d);
    ++applied;
    if (trace) *trace << "restart " << applied << " dim=" << d.steps << (d.exact ? " exact" : "") << '\n';
  }
  return d;
}

/// Projected pencil through QZ when Ah is singular, which happens when both
/// Krylov spaces pick up part of a singular block. Pairs with alpha and beta
/// both negligible are indeterminate; they are reported infinite and marked
/// ambiguous.
inline GeneralizedEig projected_qz(const DenseMatrix& ah, const DenseMatrix& bh, Scalar sigma) {
  const PencilEig pe = pencil_eig(ah, bh);
  const Index k = ah.nrows();
  const double an = ah.frobenius(), bn = bh.frobenius();
  GeneralizedEig g;
  g.theta.resize(k);
  g.lambda.resize(k);
  g.infinite.assign(k, 0);
  g.ambiguous.assign(k, 0);
  g.right_vectors = pe.right_vectors;
  g.left_vectors = pe.left_vectors;
  g.condition = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < k; ++i) {
    const bool zero_a = std::abs(pe.alpha[i]) <= 1e-13 * an;
    const bool zero_b = std::abs(pe.beta[i]) <= 1e-13 * bn;
    if (pe.infinite[i] || (zero_a && zero_b)) {
      // beta ~ 0: mu = inf, theta = 0; alpha ~ 0 as well: indeterminate
      g.infinite[i] = 1;
      g.ambiguous[i] = zero_a && zero_b;
      g.lambda[i] = Scalar{std::numeric_limits<double>::infinity(), 0.0};
      g.theta[i] = 0.0;
    } else {
      g.lambda[i] = sigma + pe.lambda[i];
      g.theta[i] = 1.0 / pe.lambda[i];
    }
  }
  return g;
}

inline double border_norm(std::span<const Scalar> v, Index leading) { return norm2(v.subspan(leading)); }

inline double residual(const ShiftInvertOperator& s, std::span<const Scalar> v, Scalar theta) {
  Vector r = s.apply(v);
  axpy(-theta, v, r);
  return norm2(r);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Regularize, run Arnoldi on the right (and left) Krylov spaces with
/// restarts at infinity, project, lift, purify and classify.
inline SolveResult solve_singular(const BorderedPencil& bp, const SolverConfig& cfg, double factor_seconds = 0.0,
                                  std::ostream* trace = nullptr) {
  cfg.validate();
  SolveResult res;
  res.factor_seconds = factor_seconds;
  res.border_rows = bp.border_rows();
  res.border_cols = bp.border_cols();
  res.normal_rank = bp.normal_rank();
  res.alpha = bp.lu().alpha;
  const Index n = bp.nrows(), m = bp.ncols();
  const bool full_column_rank = n > m && bp.border_rows() == 0;
  res.one_sided = cfg.mode == SideMode::one_sided || (cfg.mode == SideMode::automatic && full_column_rank);

  std::mt19937_64 rng(cfg.seed);
  const ShiftInvertOperator s(bp, Direction::forward);
  const ShiftInvertOperator t(bp, Direction::transposed);

  auto t0 = std::chrono::steady_clock::now();
  const InnerProduct ipr = p_matrix(bp, cfg.p_kind, Direction::forward);
  Index applied = 0;
  const ArnoldiDecomposition right =
      detail::krylov_side(s, ipr, rng, cfg.krylov_steps, cfg.implicit_restarts, applied, trace);
  res.restarts_applied = applied;
  res.forward_dim = right.steps;

  if (res.one_sided) {
    res.arnoldi_seconds = detail::seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const double hnorm = std::max(right.square_hess().norm1(), std::numeric_limits<double>::min());
    for (const RitzPair& rp : ritz_pairs(right)) {
      EigenTriplet e;
      e.theta = rp.theta;
      e.residual_estimate = rp.residual;
      e.infinite = std::abs(rp.theta) < 1e-14 * hnorm;
      e.lambda = e.infinite ? Scalar{std::numeric_limits<double>::infinity(), 0.0} : cfg.sigma + 1.0 / rp.theta;
      if (!e.infinite) {
        try {
          e.x = purify(s, rp.x);
        } catch (const InfiniteEigenvectorError&) {
          e.infinite = true;
        }
      }
      if (e.infinite) e.x = normalized(rp.x);
      e.x_border_norm = detail::border_norm(e.x, m);
      e.y_border_norm = std::numeric_limits<double>::quiet_NaN();
      e.residual_right = detail::residual(s, e.x, e.theta);
      e.residual_left = std::numeric_limits<double>::quiet_NaN();
      e.label = classify(e, cfg.classify_threshold);
      res.triplets.push_back(std::move(e));
    }
    res.projection_seconds = detail::seconds_since(t0);
    return res;
  }

  const InnerProduct ipl = p_matrix(bp, cfg.p_kind, Direction::transposed);
  Index applied_left = 0;
  const ArnoldiDecomposition left =
      detail::krylov_side(t, ipl, rng, cfg.krylov_steps, cfg.implicit_restarts, applied_left, trace);
  res.left_dim = left.steps;
  res.arnoldi_seconds = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const Index k = std::min(right.steps, left.steps);
  if (k == 0) throw NumericalError("solve_singular: empty Krylov basis");
  const DenseMatrix vk = right.basis.block(0, 0, right.basis.nrows(), k);
  const DenseMatrix wk = left.basis.block(0, 0, left.basis.nrows(), k);
  DenseMatrix ah(k, k), bh(k, k);
  for (Index j = 0; j < k; ++j) {
    const Vector bv = bp.apply_b(vk.col(j));
    Vector av = bp.apply_a(vk.col(j));
    axpy(-cfg.sigma, bv, av);
    const Vector wa = adjoint_times(wk, av);
    const Vector wb = adjoint_times(wk, bv);
    for (Index i = 0; i < k; ++i) {
      ah(i, j) = wa[i];
      bh(i, j) = wb[i];
    }
  }
  GeneralizedEig ge;
  try {
    ge = small_generalized_eig(ah, bh, cfg.sigma);
  } catch (const NumericalError&) {
    if (trace) *trace << "# projected pencil singular, falling back to QZ\n";
    ge = detail::projected_qz(ah, bh, cfg.sigma);
  }

  for (Index i = 0; i < k; ++i) {
    EigenTriplet e;
    e.theta = ge.theta[i];
    e.lambda = ge.lambda[i];
    e.infinite = ge.infinite[i] != 0;
    e.ambiguous_pairing = ge.ambiguous[i] != 0;
    const Vector x = vk * ge.right_vectors.col(i);
    const Vector y = wk * ge.left_vectors.col(i);
    if (!e.infinite) {
      try {
        e.x = purify(s, x);
        e.y = purify(t, y);
      } catch (const InfiniteEigenvectorError&) {
        e.infinite = true;
        e.lambda = Scalar{std::numeric_limits<double>::infinity(), 0.0};
      }
    }
    if (e.infinite) {
      e.x = normalized(x);
      e.y = normalized(y);
    }
    e.x_border_norm = detail::border_norm(e.x, m);
    e.y_border_norm = detail::border_norm(e.y, n);
    e.residual_right = detail::residual(s, e.x, e.theta);
    e.residual_left = detail::residual(t, e.y, std::conj(e.theta));
    e.residual_estimate = e.residual_right;
    e.label = classify(e, cfg.classify_threshold);
    e.sides_disagree =
        !e.infinite && ((e.x_border_norm < cfg.classify_threshold) != (e.y_border_norm < cfg.classify_threshold));
    res.triplets.push_back(std::move(e));
  }
  res.projection_seconds = detail::seconds_since(t0);
  return res;
}

namespace detail {

// |(beta A - alpha B) v| / (|beta| |A| + |alpha| |B|), v of unit norm
inline double backward_error(const DenseMatrix& a, const DenseMatrix& b, Scalar alpha, Scalar beta,
                             std::span<const Scalar> v, bool left) {
  Vector av = left ? adjoint_times(a, v) : a * v;
  const Vector bv = left ? adjoint_times(b, v) : b * v;
  const Scalar ca = left ? std::conj(beta) : beta, cb = left ? std::conj(alpha) : alpha;
  for (Index i = 0; i < av.size(); ++i) av[i] = ca * av[i] - cb * bv[i];
  const double den = std::abs(beta) * a.frobenius() + std::abs(alpha) * b.frobenius();
  return den == 0.0 ? 0.0 : norm2(av) / den;
}

} // namespace detail

/// QZ on the full bordered pencil. Residuals are relative backward errors
/// of the pencil (no inverted operator is formed), theta = 1/(lambda - sigma).
inline SolveResult solve_singular_dense(const BorderedPencil& bp, const SolverConfig& cfg, double factor_seconds = 0.0) {
  cfg.validate();
  if (bp.size() > dense_method_limit) throw ArgumentError("dense method: bordered pencil too large");
  SolveResult res;
  res.factor_seconds = factor_seconds;
  res.border_rows = bp.border_rows();
  res.border_cols = bp.border_cols();
  res.normal_rank = bp.normal_rank();
  res.alpha = bp.lu().alpha;
  const Index n = bp.nrows(), m = bp.ncols();
  const auto t0 = std::chrono::steady_clock::now();
  const DenseMatrix a = bp.bordered_a().to_dense(), b = bp.bordered_b().to_dense();
  const PencilEig pe = pencil_eig(a, b);
  res.forward_dim = res.left_dim = a.nrows();
  for (Index i = 0; i < a.nrows(); ++i) {
    EigenTriplet e;
    e.infinite = pe.infinite[i] != 0;
    e.lambda = pe.lambda[i];
    e.theta = e.infinite ? Scalar{} : 1.0 / (e.lambda - cfg.sigma);
    const auto x = pe.right_vectors.col(i), y = pe.left_vectors.col(i);
    e.x.assign(x.begin(), x.end());
    e.y.assign(y.begin(), y.end());
    e.x_border_norm = detail::border_norm(e.x, m);
    e.y_border_norm = detail::border_norm(e.y, n);
    e.residual_right = detail::backward_error(a, b, pe.alpha[i], pe.beta[i], e.x, false);
    e.residual_left = detail::backward_error(a, b, pe.alpha[i], pe.beta[i], e.y, true);
    e.residual_estimate = e.residual_right;
    e.label = classify(e, cfg.classify_threshold);
    e.sides_disagree =
        !e.infinite && ((e.x_border_norm < cfg.classify_threshold) != (e.y_border_norm < cfg.classify_threshold));
    res.triplets.push_back(std::move(e));
  }
  res.projection_seconds = detail::seconds_since(t0);
  return res;
}

inline SolveResult solve_singular(const Pencil& p, const SolverConfig& cfg, std::ostream* trace = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const BorderedPencil bp = regularize(p, cfg.sigma, cfg.tau);
  if (cfg.method == SolveMethod::dense) return solve_singular_dense(bp, cfg, detail::seconds_since(t0));
  return solve_singular(bp, cfg, detail::seconds_since(t0), trace);
}

struct TauSweepRow {
  double tau = 0.0;
  Index border_rows = 0;
  Index border_cols = 0;
  Index detected_rank = 0;
};

/// Border dimensions for several tolerances at the configured shift.
inline std::vector<TauSweepRow> tau_sweep(const Pencil& p, const SolverConfig& cfg, const std::vector<double>& taus) {
  if (taus.empty()) throw ArgumentError("tau_sweep: empty tolerance list");
  std::vector<TauSweepRow> rows;
  for (double tau : taus) {
    const BorderedPencil bp = regularize(p, cfg.sigma, tau);
    rows.push_back({tau, bp.border_rows(), bp.border_cols(), bp.normal_rank()});
  }
  return rows;
}

} // namespace sgep
