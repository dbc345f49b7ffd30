#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

#include "dense_matrix.hpp"
#include "scalar.hpp"

namespace sgep {

struct DenseQR {
  DenseMatrix Q; // nrows x ncols, orthonormal columns
  DenseMatrix R; // ncols x ncols, upper triangular, real nonnegative diagonal
};

struct DenseEig {
  Vector eigenvalues;
  DenseMatrix right_vectors; // column i pairs with eigenvalues[i], unit two-norm
  DenseMatrix left_vectors;  // A^* y = conj(lambda) y, unit two-norm
};

/// Thrown when the shifted QR iteration exceeds its sweep budget. The
/// eigenvalues that had already deflated are carried along.
class ConvergenceError : public NumericalError {
public:
  ConvergenceError(const std::string& what, Vector partial)
      : NumericalError(what), partial_spectrum(std::move(partial)) {}
  Vector partial_spectrum;
};

namespace detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();

inline Scalar phase_of(Scalar z) {
  const double a = std::abs(z);
  return a == 0.0 ? Scalar{1.0} : z / a;
}

// Householder vector v (v[0] real-normalised form not required) such that
// (I - 2 v v^* / v^* v) x = beta e_1. Returns {v, beta}; v is empty when x
// is already a multiple of e_1.
inline std::pair<Vector, Scalar> householder(std::span<const Scalar> x) {
  const double nrm = norm2(x);
  double tail = 0.0;
  for (Index i = 1; i < x.size(); ++i) tail = std::max(tail, std::abs(x[i]));
  if (nrm == 0.0 || tail == 0.0) return {Vector{}, x.empty() ? Scalar{} : x[0]};
  const Scalar ph = phase_of(x[0]);
  Vector v(x.begin(), x.end());
  v[0] += ph * nrm;
  return {std::move(v), -ph * nrm};
}

// Applies H = I - 2 v v^*/(v^* v) to rows [r0, r0+len) of columns [c0, c1).
inline void reflect_left(DenseMatrix& a, const Vector& v, Index r0, Index c0, Index c1) {
  const double vv = std::real(dot(v, v));
  for (Index j = c0; j < c1; ++j) {
    Scalar s{};
    for (Index k = 0; k < v.size(); ++k) s += std::conj(v[k]) * a(r0 + k, j);
    s *= 2.0 / vv;
    for (Index k = 0; k < v.size(); ++k) a(r0 + k, j) -= v[k] * s;
  }
}

// Applies H from the right to columns [c0, c0+len) of rows [r0, r1).
inline void reflect_right(DenseMatrix& a, const Vector& v, Index c0, Index r0, Index r1) {
  const double vv = std::real(dot(v, v));
  for (Index i = r0; i < r1; ++i) {
    Scalar s{};
    for (Index k = 0; k < v.size(); ++k) s += a(i, c0 + k) * v[k];
    s *= 2.0 / vv;
    for (Index k = 0; k < v.size(); ++k) a(i, c0 + k) -= s * std::conj(v[k]);
  }
}

// Plane rotation G = [[c, s], [-conj(s), c]] with G [a; b] = [r; 0].
struct Givens {
  double c = 1.0;
  Scalar s{};
  Scalar r{};
};

inline Givens make_givens(Scalar a, Scalar b) {
  const double ab = std::abs(b);
  if (ab == 0.0) return {1.0, Scalar{}, a};
  const double aa = std::abs(a);
  if (aa == 0.0) return {0.0, std::conj(b) / ab, Scalar{ab}};
  const double nrm = std::hypot(aa, ab);
  const Scalar ph = a / aa;
  return {aa / nrm, ph * std::conj(b) / nrm, ph * nrm};
}

// rows p,q <- G [row p; row q] for columns [c0, c1)
inline void rotate_rows(DenseMatrix& a, const Givens& g, Index p, Index q, Index c0, Index c1) {
  for (Index j = c0; j < c1; ++j) {
    const Scalar x = a(p, j), y = a(q, j);
    a(p, j) = g.c * x + g.s * y;
    a(q, j) = -std::conj(g.s) * x + g.c * y;
  }
}

// cols p,q <- [col p, col q] G^* for rows [r0, r1)
inline void rotate_cols(DenseMatrix& a, const Givens& g, Index p, Index q, Index r0, Index r1) {
  for (Index i = r0; i < r1; ++i) {
    const Scalar x = a(i, p), y = a(i, q);
    a(i, p) = x * g.c + y * std::conj(g.s);
    a(i, q) = -x * g.s + y * g.c;
  }
}

// Sort permutation: descending modulus; moduli equal to a relative
// 1e-12 are ordered by descending real part, then descending imaginary.
inline std::vector<Index> modulus_order(const Vector& ev) {
  std::vector<Index> idx(ev.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return std::abs(ev[a]) > std::abs(ev[b]); });
  Index start = 0;
  while (start < idx.size()) {
    const double m0 = std::abs(ev[idx[start]]);
    Index end = start + 1;
    while (end < idx.size() && m0 - std::abs(ev[idx[end]]) <= 1e-12 * std::max(m0, 1e-300)) ++end;
    std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(start), idx.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](Index a, Index b) {
                       const double tol = 1e-12 * std::max(m0, 1e-300);
                       if (std::abs(ev[a].real() - ev[b].real()) > tol) return ev[a].real() > ev[b].real();
                       return ev[a].imag() > ev[b].imag() + tol;
                     });
    start = end;
  }
  return idx;
}

} // namespace detail

/// Householder QR, economy size. The diagonal of R is made real and
/// nonnegative so the factorization is unique for full-rank input.
inline DenseQR qr(const DenseMatrix& m) {
  const Index nr = m.nrows(), nc = m.ncols();
  if (nr < nc) throw DimensionError("qr: requires nrows >= ncols");
  DenseMatrix r = m;
  std::vector<Vector> reflectors(nc);
  for (Index k = 0; k < nc; ++k) {
    const std::span<const Scalar> x = r.col(k).subspan(k);
    auto [v, beta] = detail::householder(x);
    if (!v.empty()) {
      detail::reflect_left(r, v, k, k, nc);
      for (Index i = k + 1; i < nr; ++i) r(i, k) = 0.0;
    }
    reflectors[k] = std::move(v);
  }
  DenseMatrix q(nr, nc);
  for (Index k = 0; k < nc; ++k) q(k, k) = 1.0;
  for (Index k = nc; k-- > 0;)
    if (!reflectors[k].empty()) detail::reflect_left(q, reflectors[k], k, 0, nc);

  DenseMatrix rr(nc, nc);
  for (Index j = 0; j < nc; ++j)
    for (Index i = 0; i <= j; ++i) rr(i, j) = r(i, j);
  for (Index k = 0; k < nc; ++k) {
    const Scalar d = rr(k, k);
    if (d == Scalar{} || (d.imag() == 0.0 && d.real() > 0.0)) continue;
    const Scalar ph = detail::phase_of(d);
    for (Index j = k; j < nc; ++j) rr(k, j) *= std::conj(ph);
    rr(k, k) = std::abs(d);
    for (Index i = 0; i < nr; ++i) q(i, k) *= ph;
  }
  return {std::move(q), std::move(rr)};
}

/// Reduction a = Q H Q^* with H upper Hessenberg (Householder based).
inline std::pair<DenseMatrix, DenseMatrix> hessenberg_reduce(const DenseMatrix& a) {
  require_dims(a.nrows() == a.ncols(), "hessenberg_reduce: square matrix required");
  const Index n = a.nrows();
  DenseMatrix h = a;
  DenseMatrix q = DenseMatrix::identity(n);
  for (Index k = 0; k + 2 < n; ++k) {
    const std::span<const Scalar> x = h.col(k).subspan(k + 1);
    auto [v, beta] = detail::householder(x);
    if (v.empty()) continue;
    detail::reflect_left(h, v, k + 1, 0, n);
    detail::reflect_right(h, v, k + 1, 0, n);
    detail::reflect_right(q, v, k + 1, 0, n);
    for (Index i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
  return {std::move(h), std::move(q)};
}

namespace detail {

// Complex Schur form of an upper Hessenberg matrix by single-shift QR
// with Wilkinson shifts. On return h is upper triangular and z holds the
// accumulated unitary transformations (z_in * Q).
inline void complex_schur(DenseMatrix& h, DenseMatrix& z) {
  const Index n = h.nrows();
  if (n <= 1) return;
  const double hnorm = std::max(h.frobenius(), std::numeric_limits<double>::min());
  const Index max_sweeps = 30 * n;
  Index sweeps = 0;
  Index iu = n - 1;
  Index iter = 0;

  auto negligible = [&](Index i) {
    const double s = std::abs(h(i, i)) + std::abs(h(i - 1, i - 1));
    const double ref = s == 0.0 ? hnorm : s;
    return std::abs(h(i, i - 1)) <= 1e-14 * ref;
  };

  while (true) {
    while (iu > 0 && negligible(iu)) {
      h(iu, iu - 1) = 0.0;
      --iu;
      iter = 0;
    }
    if (iu == 0) break;
    if (++sweeps > max_sweeps) {
      Vector partial;
      for (Index i = iu + 1; i < n; ++i) partial.push_back(h(i, i));
      throw ConvergenceError("hessenberg_eig: QR iteration did not converge", std::move(partial));
    }
    ++iter;
    Index il = iu - 1;
    while (il > 0 && !negligible(il)) --il;
    if (il > 0) h(il, il - 1) = 0.0;

    Scalar shift;
    if (iter % 10 == 0) {
      // exceptional shift to break cycles
      shift = std::abs(h(iu, iu - 1).real()) + (iu >= 2 ? std::abs(h(iu - 1, iu - 2).real()) : 0.0);
      shift += h(iu, iu);
    } else {
      const Scalar a = h(iu - 1, iu - 1), b = h(iu - 1, iu), c = h(iu, iu - 1), d = h(iu, iu);
      const Scalar half = 0.5 * (a - d);
      const Scalar disc = std::sqrt(half * half + b * c);
      const Scalar m = 0.5 * (a + d);
      const Scalar s1 = m + disc, s2 = m - disc;
      shift = std::abs(s1 - d) <= std::abs(s2 - d) ? s1 : s2;
    }

    Givens g = make_givens(h(il, il) - shift, h(il + 1, il));
    rotate_rows(h, g, il, il + 1, il, n);
    rotate_cols(h, g, il, il + 1, 0, std::min(il + 2, iu) + 1);
    rotate_cols(z, g, il, il + 1, 0, z.nrows());
    for (Index i = il + 1; i < iu; ++i) {
      g = make_givens(h(i, i - 1), h(i + 1, i - 1));
      h(i, i - 1) = g.r;
      h(i + 1, i - 1) = 0.0;
      rotate_rows(h, g, i, i + 1, i, n);
      rotate_cols(h, g, i, i + 1, 0, std::min(i + 2, iu) + 1);
      rotate_cols(z, g, i, i + 1, 0, z.nrows());
    }
  }
  // clear rounding residue below the diagonal
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) h(i, j) = 0.0;
}

// Eigenvectors of the triangular Schur factor t, back-transformed by z.
inline DenseEig schur_vectors(const DenseMatrix& t, const DenseMatrix& z) {
  const Index n = t.nrows();
  const double small = std::max(t.frobenius() * eps, std::numeric_limits<double>::min());
  DenseEig out;
  out.eigenvalues.resize(n);
  for (Index k = 0; k < n; ++k) out.eigenvalues[k] = t(k, k);
  DenseMatrix right(n, n), left(n, n);
  for (Index k = 0; k < n; ++k) {
    const Scalar lam = t(k, k);
    Vector x(n);
    x[k] = 1.0;
    for (Index i = k; i-- > 0;) {
      Scalar s{};
      for (Index j = i + 1; j <= k; ++j) s += t(i, j) * x[j];
      Scalar d = t(i, i) - lam;
      if (std::abs(d) < small) d = small;
      x[i] = -s / d;
    }
    right.set_col(k, normalized(z * std::span<const Scalar>(x)));

    Vector w(n);
    w[k] = 1.0;
    for (Index j = k + 1; j < n; ++j) {
      Scalar s{};
      for (Index i = k; i < j; ++i) s += std::conj(t(i, j)) * w[i];
      Scalar d = std::conj(t(j, j) - lam);
      if (std::abs(d) < small) d = small;
      w[j] = -s / d;
    }
    left.set_col(k, normalized(z * std::span<const Scalar>(w)));
  }
  const std::vector<Index> order = modulus_order(out.eigenvalues);
  DenseEig sorted;
  sorted.eigenvalues.resize(n);
  sorted.right_vectors = DenseMatrix(n, n);
  sorted.left_vectors = DenseMatrix(n, n);
  for (Index k = 0; k < n; ++k) {
    sorted.eigenvalues[k] = out.eigenvalues[order[k]];
    sorted.right_vectors.set_col(k, right.col(order[k]));
    sorted.left_vectors.set_col(k, left.col(order[k]));
  }
  return sorted;
}

} // namespace detail

/// Eigen-decomposition of an upper Hessenberg matrix. Eigenvalues are
/// returned in descending modulus (ties: descending real part).
inline DenseEig hessenberg_eig(const DenseMatrix& hin) {
  require_dims(hin.nrows() == hin.ncols(), "hessenberg_eig: square matrix required");
  const Index n = hin.nrows();
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 2; i < n; ++i)
      if (hin(i, j) != Scalar{}) throw ArgumentError("hessenberg_eig: input is not upper Hessenberg");
  DenseMatrix t = hin;
  DenseMatrix z = DenseMatrix::identity(n);
  detail::complex_schur(t, z);
  return detail::schur_vectors(t, z);
}

/// Eigen-decomposition of a general square matrix (Hessenberg reduction,
/// then hessenberg_eig on the reduced form).
inline DenseEig eig(const DenseMatrix& a) {
  auto [h, q] = hessenberg_reduce(a);
  DenseMatrix t = h;
  DenseMatrix z = q;
  detail::complex_schur(t, z);
  return detail::schur_vectors(t, z);
}

/// Dense LU with partial pivoting, P a = L U stored compactly.
struct DenseLU {
  DenseMatrix lu;
  std::vector<Index> pivot; // row swapped with row k at step k
  bool singular = false;
};

inline DenseLU lu_factor(const DenseMatrix& a) {
  require_dims(a.nrows() == a.ncols(), "lu_factor: square matrix required");
  const Index n = a.nrows();
  DenseLU f{a, std::vector<Index>(n), false};
  DenseMatrix& m = f.lu;
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    f.pivot[k] = p;
    if (m(p, k) == Scalar{}) {
      f.singular = true;
      continue;
    }
    if (p != k)
      for (Index j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
    for (Index i = k + 1; i < n; ++i) {
      m(i, k) /= m(k, k);
      const Scalar l = m(i, k);
      if (l == Scalar{}) continue;
      for (Index j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
    }
  }
  return f;
}

inline Vector lu_solve(const DenseLU& f, std::span<const Scalar> b) {
  if (f.singular) throw NumericalError("lu_solve: singular matrix");
  const Index n = f.lu.nrows();
  require_dims(b.size() == n, "lu_solve: length mismatch");
  Vector x(b.begin(), b.end());
  for (Index k = 0; k < n; ++k) std::swap(x[k], x[f.pivot[k]]);
  for (Index k = 0; k < n; ++k)
    for (Index i = k + 1; i < n; ++i) x[i] -= f.lu(i, k) * x[k];
  for (Index k = n; k-- > 0;) {
    for (Index j = k + 1; j < n; ++j) x[k] -= f.lu(k, j) * x[j];
    x[k] /= f.lu(k, k);
  }
  return x;
}

inline DenseMatrix lu_inverse(const DenseLU& f) {
  const Index n = f.lu.nrows();
  DenseMatrix inv(n, n);
  Vector e(n);
  for (Index j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Scalar{});
    e[j] = 1.0;
    inv.set_col(j, lu_solve(f, e));
  }
  return inv;
}

/// Numerical rank by Gaussian elimination with complete pivoting.
/// Elimination stops once the largest remaining entry is at most
/// tol times the largest entry of the input.
inline Index dense_rank(const DenseMatrix& m, double tol) {
  if (tol < 0.0) throw ArgumentError("dense_rank: tol must be nonnegative");
  DenseMatrix a = m;
  const Index nr = a.nrows(), nc = a.ncols();
  const double first = a.max_abs();
  if (first == 0.0) return 0;
  const double stop = tol * first;
  Index rank = 0;
  for (Index k = 0; k < std::min(nr, nc); ++k) {
    Index pr = k, pc = k;
    double best = -1.0;
    for (Index j = k; j < nc; ++j)
      for (Index i = k; i < nr; ++i)
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pr = i;
          pc = j;
        }
    if (best <= stop || best == 0.0) break;
    for (Index j = 0; j < nc; ++j) std::swap(a(k, j), a(pr, j));
    for (Index i = 0; i < nr; ++i) std::swap(a(i, k), a(i, pc));
    for (Index i = k + 1; i < nr; ++i) {
      const Scalar l = a(i, k) / a(k, k);
      if (l == Scalar{}) continue;
      for (Index j = k + 1; j < nc; ++j) a(i, j) -= l * a(k, j);
      a(i, k) = 0.0;
    }
    ++rank;
  }
  return rank;
}

/// Eigentriplets of the small pencil Ah - lambda Bh through the inverted
/// form Ah^{-1} Bh. theta are eigenvalues of Ah^{-1} Bh; lambda = sigma +
/// 1/theta, infinite when |theta| is negligible.
struct GeneralizedEig {
  Vector theta;
  Vector lambda;                  // meaningful only where !infinite[i]
  std::vector<char> infinite;
  DenseMatrix right_vectors;      // Ah x = lambda Bh x (shifted form)
  DenseMatrix left_vectors;       // paired with right_vectors column-wise
  std::vector<char> ambiguous;    // left/right pairing not clear-cut
  double condition = 0.0;         // one-norm condition estimate of Ah
};

inline GeneralizedEig small_generalized_eig(const DenseMatrix& ah, const DenseMatrix& bh, Scalar sigma = 0.0) {
  require_dims(ah.nrows() == ah.ncols() && bh.nrows() == bh.ncols() && ah.nrows() == bh.nrows(),
               "small_generalized_eig: Ah and Bh must be square of equal size");
  const Index n = ah.nrows();
  GeneralizedEig out;
  if (n == 0) return out;
  const DenseLU f = lu_factor(ah);
  if (f.singular) throw NumericalError("small_generalized_eig: projected matrix is singular");
  const DenseMatrix ainv = lu_inverse(f);
  out.condition = ah.norm1() * ainv.norm1();
  if (!(out.condition <= 1e15)) throw NumericalError("small_generalized_eig: projected matrix numerically singular");

  const DenseMatrix c = ainv * bh;
  const DenseMatrix d = ainv.adjoint() * bh.adjoint();
  const DenseEig right = eig(c);
  const DenseEig left = eig(d);

  // greedy nearest pairing of theta_i with conj(phi_j)
  std::vector<std::tuple<double, Index, Index>> cand;
  cand.reserve(n * n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      cand.emplace_back(std::abs(right.eigenvalues[i] - std::conj(left.eigenvalues[j])), i, j);
  std::sort(cand.begin(), cand.end());
  std::vector<Index> match(n, n);
  std::vector<char> used(n, 0);
  for (const auto& [dist, i, j] : cand) {
    if (match[i] != n || used[j]) continue;
    match[i] = j;
    used[j] = 1;
  }

  const double cnorm = c.norm1();
  out.theta = right.eigenvalues;
  out.lambda.resize(n);
  out.infinite.assign(n, 0);
  out.ambiguous.assign(n, 0);
  out.right_vectors = right.right_vectors;
  out.left_vectors = DenseMatrix(n, n);
  for (Index i = 0; i < n; ++i) {
    out.left_vectors.set_col(i, left.right_vectors.col(match[i]));
    const Scalar th = out.theta[i];
    if (cnorm == 0.0 || std::abs(th) < 1e-14 * cnorm) {
      out.infinite[i] = 1;
      out.lambda[i] = Scalar{std::numeric_limits<double>::infinity(), 0.0};
    } else {
      out.lambda[i] = sigma + 1.0 / th;
    }
    // two left candidates almost equally close to theta_i
    double best = std::numeric_limits<double>::infinity(), second = best;
    for (Index j = 0; j < n; ++j) {
      const double dist = std::abs(th - std::conj(left.eigenvalues[j]));
      if (dist < best) {
        second = best;
        best = dist;
      } else if (dist < second) {
        second = dist;
      }
    }
    if (n > 1 && second - best < 1e-8 * std::max(1.0, std::abs(th))) out.ambiguous[i] = 1;
  }
  return out;
}

/// Generalized Schur decomposition A = Q S Z^*, B = Q T Z^* with S, T upper
/// triangular. Eigenvalues are alpha[i] / beta[i]; beta is zero or tiny for
/// infinite eigenvalues, and both are tiny for the singular part of a
/// singular pencil.
struct GeneralizedSchur {
  DenseMatrix S, T, Q, Z;
  Vector alpha, beta;
};

struct PencilEig {
  Vector alpha, beta;
  Vector lambda;             // alpha / beta, inf when beta is negligible
  std::vector<char> infinite;
  DenseMatrix right_vectors; // (beta A - alpha B) x = 0, unit two-norm
  DenseMatrix left_vectors;  // y^* (beta A - alpha B) = 0, unit two-norm
};

namespace detail {

// x' = c x + s y, y' = c y - conj(s) x on columns x, y of rows [r0, r1)
inline void zrot_cols(DenseMatrix& a, Index x, Index y, double c, Scalar s, Index r0, Index r1) {
  for (Index i = r0; i < r1; ++i) {
    const Scalar u = a(i, x), v = a(i, y);
    a(i, x) = c * u + s * v;
    a(i, y) = c * v - std::conj(s) * u;
  }
}

// Q <- Q G^* for a row rotation G on rows p, q
inline void accumulate_left(DenseMatrix& q, const Givens& g, Index p, Index r) {
  zrot_cols(q, p, r, g.c, std::conj(g.s), 0, q.nrows());
}

inline void row_rot(DenseMatrix& a, const Givens& g, Index p, Index q, Index c0, Index c1) {
  rotate_rows(a, g, p, q, c0, c1);
}

} // namespace detail

/// Complex QZ: Hessenberg-triangular reduction followed by single-shift
/// iterations; zero diagonal entries of T are chased out to give exact
/// infinite eigenvalues.
inline GeneralizedSchur generalized_schur(const DenseMatrix& a, const DenseMatrix& b) {
  using detail::Givens;
  using detail::make_givens;
  const Index n = a.nrows();
  require_dims(a.ncols() == n && b.nrows() == n && b.ncols() == n, "generalized_schur: square pencil of equal size required");
  GeneralizedSchur g;
  g.alpha.assign(n, Scalar{});
  g.beta.assign(n, Scalar{});
  if (n == 0) return g;

  const DenseQR fb = qr(b);
  DenseMatrix h = fb.Q.adjoint() * a;
  DenseMatrix t = fb.R;
  DenseMatrix q = fb.Q;
  DenseMatrix z = DenseMatrix::identity(n);

  for (Index jc = 0; jc + 2 < n; ++jc) {
    for (Index jr = n - 1; jr >= jc + 2; --jr) {
      Givens r = make_givens(h(jr - 1, jc), h(jr, jc));
      h(jr - 1, jc) = r.r;
      h(jr, jc) = 0.0;
      detail::row_rot(h, r, jr - 1, jr, jc + 1, n);
      detail::row_rot(t, r, jr - 1, jr, jr - 1, n);
      detail::accumulate_left(q, r, jr - 1, jr);
      r = make_givens(t(jr, jr), t(jr, jr - 1));
      t(jr, jr) = r.r;
      t(jr, jr - 1) = 0.0;
      detail::zrot_cols(h, jr, jr - 1, r.c, r.s, 0, n);
      detail::zrot_cols(t, jr, jr - 1, r.c, r.s, 0, jr);
      detail::zrot_cols(z, jr, jr - 1, r.c, r.s, 0, n);
    }
  }

  const double hn = h.frobenius(), tn = t.frobenius();
  const double tiny = std::numeric_limits<double>::min();
  const double atol = std::max(tiny, detail::eps * hn);
  const double btol = std::max(tiny, detail::eps * tn);

  // T(j, j) == 0 with H(j, j-1) == 0: push the zero down the diagonal.
  // Returns the index where T regained a nonzero diagonal, or n when the
  // zero reached `last`.
  auto chase_rows = [&](Index j, Index last) -> Index {
    for (Index jc = j; jc < last; ++jc) {
      const Givens r = make_givens(h(jc, jc), h(jc + 1, jc));
      h(jc, jc) = r.r;
      h(jc + 1, jc) = 0.0;
      detail::row_rot(h, r, jc, jc + 1, jc + 1, n);
      detail::row_rot(t, r, jc, jc + 1, jc + 1, n);
      detail::accumulate_left(q, r, jc, jc + 1);
      if (std::abs(t(jc + 1, jc + 1)) >= btol) return jc + 1;
      t(jc + 1, jc + 1) = 0.0;
    }
    return n;
  };
  // T(j, j) == 0 inside an unreduced block: move the zero to T(last, last).
  auto chase_cols = [&](Index j, Index last) {
    for (Index jc = j; jc < last; ++jc) {
      Givens r = make_givens(t(jc, jc + 1), t(jc + 1, jc + 1));
      t(jc, jc + 1) = r.r;
      t(jc + 1, jc + 1) = 0.0;
      detail::row_rot(t, r, jc, jc + 1, jc + 2, n);
      detail::row_rot(h, r, jc, jc + 1, jc - 1, n);
      detail::accumulate_left(q, r, jc, jc + 1);
      r = make_givens(h(jc + 1, jc), h(jc + 1, jc - 1));
      h(jc + 1, jc) = r.r;
      h(jc + 1, jc - 1) = 0.0;
      detail::zrot_cols(h, jc, jc - 1, r.c, r.s, 0, jc + 1);
      detail::zrot_cols(t, jc, jc - 1, r.c, r.s, 0, jc);
      detail::zrot_cols(z, jc, jc - 1, r.c, r.s, 0, n);
    }
  };
  // T(last, last) == 0: zero H(last, last-1) so that `last` deflates.
  auto kill_last = [&](Index last) {
    const Givens r = make_givens(h(last, last), h(last, last - 1));
    h(last, last) = r.r;
    h(last, last - 1) = 0.0;
    detail::zrot_cols(h, last, last - 1, r.c, r.s, 0, last);
    detail::zrot_cols(t, last, last - 1, r.c, r.s, 0, last);
    detail::zrot_cols(z, last, last - 1, r.c, r.s, 0, n);
  };

  Index ilast = n - 1;
  Index iter = 0, since_deflation = 0;
  const Index max_iter = 30 * n + 30;
  while (true) {
    if (ilast == 0) break;
    if (std::abs(h(ilast, ilast - 1)) <= atol) {
      h(ilast, ilast - 1) = 0.0;
      --ilast;
      since_deflation = 0;
      continue;
    }
    if (std::abs(t(ilast, ilast)) <= btol) {
      t(ilast, ilast) = 0.0;
      kill_last(ilast);
      --ilast;
      since_deflation = 0;
      continue;
    }
    Index ifirst = 0;
    bool deflated = false;
    for (Index j = ilast - 1;; --j) {
      bool split = j == 0;
      if (!split && std::abs(h(j, j - 1)) <= atol) {
        h(j, j - 1) = 0.0;
        split = true;
      }
      if (std::abs(t(j, j)) < btol) {
        t(j, j) = 0.0;
        if (split) {
          const Index back = chase_rows(j, ilast);
          if (back == n) {
            kill_last(ilast);
            --ilast;
            deflated = true;
          } else if (back >= ilast) {
            --ilast;
            deflated = true;
          } else {
            ifirst = back;
          }
        } else {
          chase_cols(j, ilast);
          kill_last(ilast);
          --ilast;
          deflated = true;
        }
        break;
      }
      if (split) {
        ifirst = j;
        break;
      }
    }
    if (deflated) {
      since_deflation = 0;
      continue;
    }

    if (++iter > max_iter) {
      Vector partial;
      for (Index i = ilast + 1; i < n; ++i) partial.push_back(t(i, i) == 0.0 ? Scalar{INFINITY} : h(i, i) / t(i, i));
      throw ConvergenceError("generalized_schur: QZ iteration did not converge", std::move(partial));
    }
    ++since_deflation;

    // shift: eigenvalue of the trailing 2x2 pencil closest to the corner
    Scalar shift;
    const Index l = ilast;
    if (since_deflation % 10 == 0) {
      shift = h(l, l) / t(l, l) + std::abs(h(l, l - 1)) / std::abs(t(l - 1, l - 1));
    } else {
      const Scalar a11 = h(l - 1, l - 1), a12 = h(l - 1, l), a21 = h(l, l - 1), a22 = h(l, l);
      const Scalar b11 = t(l - 1, l - 1), b12 = t(l - 1, l), b22 = t(l, l);
      // det(A - mu B) = 0: quadratic in mu
      const Scalar qa = b11 * b22;
      const Scalar qb = -(a11 * b22 + a22 * b11 - a21 * b12);
      const Scalar qc = a11 * a22 - a12 * a21;
      const Scalar disc = std::sqrt(qb * qb - 4.0 * qa * qc);
      const Scalar den = std::abs(-qb + disc) >= std::abs(-qb - disc) ? -qb + disc : -qb - disc;
      const Scalar corner = a22 / b22;
      if (den == Scalar{}) {
        shift = corner;
      } else {
        const Scalar m1 = den / (2.0 * qa), m2 = 2.0 * qc / den;
        shift = std::abs(m1 - corner) <= std::abs(m2 - corner) ? m1 : m2;
      }
      if (!std::isfinite(shift.real()) || !std::isfinite(shift.imag())) shift = corner;
    }

    Givens r = make_givens(h(ifirst, ifirst) - shift * t(ifirst, ifirst), h(ifirst + 1, ifirst));
    for (Index j = ifirst; j < ilast; ++j) {
      if (j > ifirst) {
        r = make_givens(h(j, j - 1), h(j + 1, j - 1));
        h(j, j - 1) = r.r;
        h(j + 1, j - 1) = 0.0;
      }
      detail::row_rot(h, r, j, j + 1, j, n);
      detail::row_rot(t, r, j, j + 1, j, n);
      detail::accumulate_left(q, r, j, j + 1);
      const Givens c = make_givens(t(j + 1, j + 1), t(j + 1, j));
      t(j + 1, j + 1) = c.r;
      t(j + 1, j) = 0.0;
      detail::zrot_cols(h, j + 1, j, c.c, c.s, 0, std::min(j + 3, ilast + 1));
      detail::zrot_cols(t, j + 1, j, c.c, c.s, 0, j + 1);
      detail::zrot_cols(z, j + 1, j, c.c, c.s, 0, n);
    }
  }

  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      h(i, j) = 0.0;
      t(i, j) = 0.0;
    }
  for (Index i = 0; i < n; ++i) {
    g.alpha[i] = h(i, i);
    g.beta[i] = t(i, i);
  }
  g.S = std::move(h);
  g.T = std::move(t);
  g.Q = std::move(q);
  g.Z = std::move(z);
  return g;
}

/// Eigenvalues and eigenvectors of a square pencil by QZ. `inf_tol` is the
/// relative size of |beta| (against |B|_F) below which an eigenvalue is
/// reported infinite.
inline PencilEig pencil_eig(const DenseMatrix& a, const DenseMatrix& b, double inf_tol = 1e-13) {
  const GeneralizedSchur gs = generalized_schur(a, b);
  const Index n = a.nrows();
  PencilEig out;
  out.alpha = gs.alpha;
  out.beta = gs.beta;
  out.lambda.assign(n, Scalar{});
  out.infinite.assign(n, 0);
  out.right_vectors = DenseMatrix(n, n);
  out.left_vectors = DenseMatrix(n, n);
  const double bn = b.frobenius();
  const double sn = std::max(gs.S.frobenius(), std::numeric_limits<double>::min());
  const double tn = std::max(gs.T.frobenius(), std::numeric_limits<double>::min());
  for (Index k = 0; k < n; ++k) {
    if (std::abs(gs.beta[k]) <= inf_tol * bn) {
      out.infinite[k] = 1;
      out.lambda[k] = Scalar{std::numeric_limits<double>::infinity(), 0.0};
    } else {
      out.lambda[k] = gs.alpha[k] / gs.beta[k];
    }
    // C = beta_k S - alpha_k T, scaled so both terms are balanced
    const double scale = std::max(std::abs(gs.alpha[k]) / sn, std::abs(gs.beta[k]) / tn);
    const Scalar bk = scale > 0.0 ? gs.beta[k] / (scale * tn * sn) : Scalar{};
    const Scalar ak = scale > 0.0 ? gs.alpha[k] / (scale * tn * sn) : Scalar{};
    auto c = [&](Index i, Index j) { return bk * gs.S(i, j) - ak * gs.T(i, j); };
    const double small = detail::eps * std::max(std::abs(bk) * sn, std::abs(ak) * tn);
    auto guard = [&](Scalar d) { return std::abs(d) < small ? Scalar{small == 0.0 ? 1.0 : small} : d; };

    Vector x(n);
    x[k] = 1.0;
    for (Index ii = k; ii-- > 0;) {
      Scalar s{};
      for (Index j = ii + 1; j <= k; ++j) s += c(ii, j) * x[j];
      x[ii] = -s / guard(c(ii, ii));
    }
    Vector w(n);
    w[k] = 1.0;
    for (Index j = k + 1; j < n; ++j) {
      Scalar s{};
      for (Index i = k; i < j; ++i) s += std::conj(c(i, j)) * w[i];
      w[j] = -s / guard(std::conj(c(j, j)));
    }
    out.right_vectors.set_col(k, normalized(gs.Z * std::span<const Scalar>(x)));
    out.left_vectors.set_col(k, normalized(gs.Q * std::span<const Scalar>(w)));
  }
  return out;
}


} // namespace sgep
