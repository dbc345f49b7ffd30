#include <sstream>

#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace testing;

namespace {

Pencil diag_pencil(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<Triplet> ta, tb;
  for (Index i = 0; i < a.size(); ++i) {
    ta.push_back({i, i, a[i]});
    tb.push_back({i, i, b[i]});
  }
  return Pencil(SparseMatrix::from_triplets(a.size(), a.size(), ta), SparseMatrix::from_triplets(b.size(), b.size(), tb));
}

Vector column(const DenseMatrix& m, Index j) {
  const auto c = m.col(j);
  return Vector(c.begin(), c.end());
}

// max_j |S v_j - V h_j|_P and max |v_i^* P v_j - delta_ij|
std::pair<double, double> defects(const ShiftInvertOperator& s, const ArnoldiDecomposition& d) {
  double rel = 0.0, orth = 0.0;
  const Index cols = d.exact ? d.steps : d.steps + 1;
  for (Index j = 0; j < d.steps; ++j) {
    Vector r = s.apply(d.basis.col(j));
    for (Index i = 0; i <= d.steps; ++i) axpy(-d.hess(i, j), d.basis.col(i), r);
    rel = std::max(rel, d.inner.norm(r));
  }
  for (Index i = 0; i < cols; ++i)
    for (Index j = 0; j < cols; ++j)
      orth = std::max(orth, std::abs(d.inner.inner(d.basis.col(i), d.basis.col(j)) - (i == j ? 1.0 : 0.0)));
  return {rel, orth};
}

void check_hessenberg_shape(const ArnoldiDecomposition& d) {
  REQUIRE(d.hess.nrows() == d.steps + 1);
  REQUIRE(d.hess.ncols() == d.steps);
  for (Index j = 0; j < d.steps; ++j) {
    CHECK(d.hess(j + 1, j).imag() == 0.0);
    CHECK(d.hess(j + 1, j).real() >= 0.0);
    for (Index i = j + 2; i <= d.steps; ++i) CHECK(d.hess(i, j) == Scalar{});
  }
}

// plain Euclidean Arnoldi on a dense matrix, modified Gram-Schmidt twice
DenseMatrix reference_arnoldi(const DenseMatrix& a, Vector v, Index steps) {
  const Index n = a.nrows();
  DenseMatrix h(steps + 1, steps);
  std::vector<Vector> basis;
  double nv = 0.0;
  for (const Scalar& x : v) nv += std::norm(x);
  for (Scalar& x : v) x /= std::sqrt(nv);
  basis.push_back(v);
  for (Index j = 0; j < steps; ++j) {
    Vector w = naive_matvec(a, basis[j]);
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i <= j; ++i) {
        Scalar c{};
        for (Index r = 0; r < n; ++r) c += std::conj(basis[i][r]) * w[r];
        h(i, j) += c;
        for (Index r = 0; r < n; ++r) w[r] -= c * basis[i][r];
      }
    double nw = 0.0;
    for (const Scalar& x : w) nw += std::norm(x);
    nw = std::sqrt(nw);
    h(j + 1, j) = nw;
    for (Scalar& x : w) x /= nw;
    basis.push_back(w);
  }
  return h;
}

double angle(const Vector& a, const Vector& b) {
  // sine of the angle via the orthogonal residual; acos loses half the digits
  const double na = norm2(a), nb = norm2(b);
  const Scalar c = dot(b, a) / (nb * nb);
  double r = 0.0;
  for (Index i = 0; i < a.size(); ++i) r += std::norm(a[i] - c * b[i]);
  return std::asin(std::min(1.0, std::sqrt(r) / na));
}

} // namespace

TEST_CASE("scalar operator breaks down after one step") {
  const BorderedPencil bp = regularize(diag_pencil({2, 2, 2}, {1, 1, 1}), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const ArnoldiDecomposition d = arnoldi_run(s, Vector{1.0, Scalar{0, 2}, -1.0}, p_matrix(bp, InnerProductKind::identity_block), 3);
  CHECK(d.exact);
  CHECK(d.steps == 1);
  CHECK(std::abs(d.hess(0, 0) - 0.5) <= 1e-15);
  CHECK(d.hess(1, 0) == Scalar{});
  const std::vector<RitzPair> rp = ritz_pairs(d);
  REQUIRE(rp.size() == 1);
  CHECK(std::abs(rp[0].theta - 0.5) <= 1e-15);
  CHECK(rp[0].residual == 0.0);
}

TEST_CASE("diag(1, 1/2, 1/3) against hand Gram-Schmidt") {
  const BorderedPencil bp = regularize(diag_pencil({1, 2, 3}, {1, 1, 1}), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const double r3 = 1.0 / std::sqrt(3.0);
  const ArnoldiDecomposition d = arnoldi_run(s, Vector{r3, r3, r3}, p_matrix(bp, InnerProductKind::identity_block), 2);

  // hand computation with v1 = ones / sqrt 3
  const double dv[3] = {1.0, 0.5, 1.0 / 3.0};
  const double h11 = (dv[0] + dv[1] + dv[2]) / 3.0;
  double w[3], nw = 0.0;
  for (int i = 0; i < 3; ++i) {
    w[i] = (dv[i] - h11) * r3;
    nw += w[i] * w[i];
  }
  const double h21 = std::sqrt(nw);
  double v2[3], h12 = 0.0, h22 = 0.0;
  for (int i = 0; i < 3; ++i) v2[i] = w[i] / h21;
  for (int i = 0; i < 3; ++i) {
    h12 += r3 * dv[i] * v2[i];
    h22 += v2[i] * dv[i] * v2[i];
  }
  double w2[3], nw2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    w2[i] = dv[i] * v2[i] - h12 * r3 - h22 * v2[i];
    nw2 += w2[i] * w2[i];
  }
  CHECK(std::abs(d.hess(0, 0) - h11) <= 1e-14);
  CHECK(std::abs(d.hess(1, 0) - h21) <= 1e-14);
  CHECK(std::abs(d.hess(0, 1) - h12) <= 1e-14);
  CHECK(std::abs(d.hess(1, 1) - h22) <= 1e-14);
  CHECK(std::abs(d.hess(2, 1) - std::sqrt(nw2)) <= 1e-14);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(d.basis(i, 1) - v2[i]) <= 1e-14);
}

TEST_CASE("diag operator: full run reproduces the spectrum") {
  const BorderedPencil bp = regularize(diag_pencil({1, 2, 3}, {1, 1, 1}), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const ArnoldiDecomposition d = arnoldi_run(s, Vector{1.0, 1.0, 1.0}, p_matrix(bp, InnerProductKind::identity_block), 5);
  CHECK(d.exact);
  CHECK(d.steps == 3);
  Vector theta;
  for (const RitzPair& r : ritz_pairs(d)) {
    theta.push_back(r.theta);
    CHECK(r.residual == 0.0);
  }
  CHECK(set_distance(theta, Vector{1.0, 0.5, 1.0 / 3.0}) <= 1e-12);
}

TEST_CASE("Arnoldi relation and P-orthogonality") {
  std::mt19937_64 rng(51);
  std::vector<Pencil> pencils{toy(), gen_tolerance_pencil(false, tolerance_default_seed).pencil,
                              gen_tolerance_pencil(true, tolerance_default_seed).pencil,
                              gen_quadratic_companion(20, 1.0, -3.0, 2.0, quadratic_default_seed).pencil};
  for (const Pencil& p : pencils) {
    const BorderedPencil bp = regularize(p, Scalar{0.1, 0.05}, 1e-12);
    for (Direction dir : {Direction::forward, Direction::transposed}) {
      const ShiftInvertOperator s(bp, dir);
      const InnerProduct ip = p_matrix(bp, InnerProductKind::identity_block, dir);
      const Vector v0 = s.apply(random_vector(bp.size(), rng));
      for (Index steps : {1, 2, 4, 8}) {
        const ArnoldiDecomposition d = arnoldi_run(s, v0, ip, steps);
        CHECK(d.steps <= steps);
        check_hessenberg_shape(d);
        const auto [rel, orth] = defects(s, d);
        CHECK(rel <= 1e-9 * std::max(1.0, d.hess.frobenius()));
        CHECK(orth <= 1e-10);
      }
    }
  }
}

TEST_CASE("B-weighted inner product on a semidefinite B") {
  std::mt19937_64 rng(52);
  const DenseMatrix a = random_dense(6, 6, rng);
  const Pencil p(SparseMatrix::from_dense(a), diag_pencil({0, 0, 0, 0, 0, 0}, {1, 2, 3, 4, 0, 0}).B);
  const BorderedPencil bp = regularize(p, 0.2, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const InnerProduct ip = p_matrix(bp, InnerProductKind::b_block);
  const ArnoldiDecomposition d = arnoldi_run(s, s.apply(random_vector(bp.size(), rng)), ip, 3);
  check_hessenberg_shape(d);
  const auto [rel, orth] = defects(s, d);
  CHECK(rel <= 1e-9 * d.hess.frobenius());
  CHECK(orth <= 1e-10);
}

TEST_CASE("P-Arnoldi equals Euclidean Arnoldi on the leading block") {
  std::mt19937_64 rng(53);
  for (const Pencil& p : {toy(), gen_tolerance_pencil(false, tolerance_default_seed).pencil}) {
    const BorderedPencil bp = regularize(p, 0.0, 1e-12);
    const ShiftInvertOperator s(bp, Direction::forward);
    const DenseMatrix full = dense_shift_invert(bp);
    const Index m = bp.ncols();
    // B_hat has zero border columns, so S = [[S11, 0], [S21, 0]]
    for (Index j = m; j < bp.size(); ++j)
      for (Index i = 0; i < bp.size(); ++i) REQUIRE(full(i, j) == Scalar{});
    const DenseMatrix s11 = full.block(0, 0, m, m);
    const Vector v0 = random_vector(bp.size(), rng);
    const Index steps = std::min<Index>(m - 1, 6);
    const ArnoldiDecomposition d = arnoldi_run(s, v0, p_matrix(bp, InnerProductKind::identity_block), steps);
    if (d.exact) continue;
    const DenseMatrix ref = reference_arnoldi(s11, Vector(v0.begin(), v0.begin() + static_cast<std::ptrdiff_t>(m)), d.steps);
    CHECK(max_abs_diff(d.hess, ref) <= 1e-10 * ref.frobenius());
  }
}

TEST_CASE("border-induced zeros are not seen") {
  // the toy bordered pencil has 4 zero eigenvalues of S; one comes from the
  // n - k = 1 border and stays invisible to the P-orthogonal iteration
  const BorderedPencil bp = regularize(toy(), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const Index dense_zeros = zero_cluster_count(dense_shift_invert(bp), 1e-8);
  REQUIRE(dense_zeros == 4);
  std::mt19937_64 rng(54);
  const ArnoldiDecomposition d =
      arnoldi_run(s, random_vector(5, rng), p_matrix(bp, InnerProductKind::identity_block), 5);
  CHECK(d.steps <= bp.ncols());
  Index ritz_zeros = 0;
  for (const RitzPair& r : ritz_pairs(d))
    if (std::abs(r.theta) <= 1e-12) ++ritz_zeros;
  CHECK(ritz_zeros <= dense_zeros - (bp.nrows() - bp.normal_rank()));
}

TEST_CASE("implicit restart at infinity") {
  std::mt19937_64 rng(55);
  // the tolerance pencils have a 4-dimensional Krylov space
  const std::vector<std::pair<Pencil, Index>> cases{
      {gen_tolerance_pencil(false, tolerance_default_seed).pencil, 3},
      {gen_tolerance_pencil(true, tolerance_default_seed).pencil, 3},
      {gen_quadratic_companion(20, 1.0, -3.0, 2.0, quadratic_default_seed).pencil, 8}};
  for (const auto& [p, steps] : cases) {
    const BorderedPencil bp = regularize(p, 0.05, 1e-12);
    const ShiftInvertOperator s(bp, Direction::forward);
    const InnerProduct ip = p_matrix(bp, InnerProductKind::identity_block);
    const ArnoldiDecomposition d = arnoldi_run(s, random_vector(bp.size(), rng), ip, steps);
    REQUIRE_FALSE(d.exact);
    const ArnoldiDecomposition r = implicit_restart_infinity(d);
    CHECK(r.steps == d.steps - 1);
    CHECK(r.basis.ncols() == r.steps + 1);
    check_hessenberg_shape(r);
    // the relation error is inherited from the input, whose scale is |S|
    // on the Krylov space (about 3e9 for the perturbed pencil)
    const double scale = std::max(1.0, d.hess.frobenius());
    const auto [rel, orth] = defects(s, r);
    CHECK(rel <= 1e-9 * std::max(scale, r.hess.frobenius()));
    CHECK(orth <= 1e-10);

    // the restarted basis lies in S span(V_k): the filter multiplies by S
    const DenseQR f = qr(dense_shift_invert(bp) * d.krylov_basis());
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < f.R.ncols(); ++j) {
      rmax = std::max(rmax, std::abs(f.R(j, j)));
      rmin = std::min(rmin, std::abs(f.R(j, j)));
    }
    REQUIRE(rmin > 0.0);
    const DenseMatrix proj = f.Q * (f.Q.adjoint() * r.basis);
    CHECK(max_abs_diff(proj, r.basis) <= std::max(1e-10, 1e-14 * rmax / rmin));

    const ArnoldiDecomposition r2 = implicit_restart_infinity(r);
    CHECK(r2.steps == d.steps - 2);
    CHECK(defects(s, r2).first <= 1e-9 * scale);
  }
}

TEST_CASE("restart of an invariant pair keeps the Ritz value") {
  const BorderedPencil bp = regularize(diag_pencil({1, 2, 3}, {1, 1, 1}), 0.0, 1e-12);
  ArnoldiDecomposition d{DenseMatrix::identity(3), DenseMatrix::from_rows({{1, 0}, {0, 0.5}, {0, 0}}),
                         p_matrix(bp, InnerProductKind::identity_block), 2, false};
  const ArnoldiDecomposition r = implicit_restart_infinity(d);
  REQUIRE(r.steps == 1);
  CHECK(std::abs(r.hess(0, 0) - 1.0) <= 1e-12);
  CHECK(std::abs(r.hess(1, 0)) <= 1e-12);
  CHECK(angle(column(r.basis, 0), Vector{1.0, 0.0, 0.0}) <= 1e-12);
  CHECK(ritz_pairs(r)[0].theta == r.hess(0, 0));

  d.steps = 1;
  d.hess = d.hess.block(0, 0, 2, 1);
  CHECK_THROWS_AS(implicit_restart_infinity(d), ArgumentError);
}

TEST_CASE("argument errors") {
  const BorderedPencil bp = regularize(toy(), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  const InnerProduct ip = p_matrix(bp, InnerProductKind::identity_block);
  CHECK_THROWS_AS(arnoldi_run(s, Vector{0, 0, 0, 0, 1.0}, ip, 2), NumericalError);
  CHECK_THROWS_AS(arnoldi_run(s, Vector{1.0, 0, 0, 0, 0}, ip, 0), ArgumentError);
  CHECK_THROWS_AS(arnoldi_run(s, Vector{1.0, 0, 0, 0}, ip, 2), DimensionError);
}

TEST_CASE("purify") {
  const BorderedPencil bp = regularize(toy(), 0.0, 1e-12);
  const Vector e1{1.0, 0, 0, 0, 0};
  CHECK(angle(purify(bp, e1), e1) <= 1e-12);
  const Vector dirty{1.0, 0, 0, 0, 0.7}; // e5 is a zero column of B_hat
  CHECK(angle(purify(bp, dirty), e1) <= 1e-10);
  CHECK(norm2(purify(bp, dirty)) == Catch::Approx(1.0));
  CHECK_THROWS_AS(purify(bp, Vector{0, 0, 0, 0, 1.0}), InfiniteEigenvectorError);
}

TEST_CASE("trace lines") {
  const BorderedPencil bp = regularize(toy(), 0.0, 1e-12);
  const ShiftInvertOperator s(bp, Direction::forward);
  std::ostringstream out;
  std::mt19937_64 rng(56);
  arnoldi_run(s, random_vector(5, rng), p_matrix(bp, InnerProductKind::identity_block), 5, &out);
  CHECK(out.str().find("arnoldi step=1 h_col_norm=") != std::string::npos);
  CHECK(out.str().find("breakdown") != std::string::npos);
}
