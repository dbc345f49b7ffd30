#include <catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace testing;

TEST_CASE("spmv small cases") {
  const Vector x{1.0, 2.0, 3.0};
  CHECK(spmv(SparseMatrix::identity(3), x) == x);
  CHECK(spmv(SparseMatrix(2, 2), Vector{5.0, 7.0}) == Vector{0.0, 0.0});
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}});
  CHECK(spmv(m, Vector{3.0, 4.0}) == Vector{4.0, 6.0});
  CHECK_THROWS_AS(spmv(m, x), DimensionError);
}

TEST_CASE("spmv_adjoint small cases") {
  const Vector x{1.0, 2.0, 3.0};
  CHECK(spmv_adjoint(SparseMatrix::identity(3), x) == x);
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 2.0}});
  CHECK(spmv_adjoint(m, Vector{3.0, 4.0}) == Vector{8.0, 3.0});
  const SparseMatrix c = SparseMatrix::from_triplets(2, 2, {{0, 0, Scalar{1.0, 1.0}}});
  CHECK(spmv_adjoint(c, Vector{1.0, 0.0}) == Vector{Scalar{1.0, -1.0}, 0.0});
  CHECK_THROWS_AS(spmv_adjoint(m, x), DimensionError);
}

TEST_CASE("canonical storage") {
  // duplicates summed, zeros dropped, rows sorted
  const SparseMatrix m =
      SparseMatrix::from_triplets(3, 2, {{2, 0, 1.0}, {0, 0, 2.0}, {2, 0, 3.0}, {1, 1, 0.0}, {1, 1, 5.0}, {0, 1, 0.0}});
  REQUIRE(m.col_ptr().size() == 3);
  CHECK(m.col_ptr()[0] == 0);
  CHECK(m.col_ptr()[2] == m.nnz());
  CHECK(m.nnz() == 3);
  CHECK(m.at(2, 0) == Scalar{4.0});
  for (Index j = 0; j < m.ncols(); ++j) {
    const auto rows = m.col_rows(j);
    for (Index k = 1; k < rows.size(); ++k) CHECK(rows[k - 1] < rows[k]);
  }
  for (const Scalar& v : m.values()) CHECK(v != Scalar{});
}

TEST_CASE("spmv matches dense oracle on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index nr = 1 + rng() % 30, nc = 1 + rng() % 30;
    const SparseMatrix m = random_sparse(nr, nc, 0.2, rng);
    const Vector x = random_vector(nc, rng);
    const Vector want = naive_matvec(m.to_dense(), x);
    const Vector got = spmv(m, x);
    double scale = 0.0;
    for (Index i = 0; i < nr; ++i) {
      double s = 0.0;
      for (Index j = 0; j < nc; ++j) s += std::abs(m.at(i, j)) * std::abs(x[j]);
      scale = std::max(scale, s);
    }
    for (Index i = 0; i < nr; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-14 * std::max(scale, 1.0));
  }
}

TEST_CASE("adjoint consistency <Mx, y> = <x, M^* y>") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Index nr = 1 + rng() % 40, nc = 1 + rng() % 40;
    const SparseMatrix m = random_sparse(nr, nc, 0.3, rng);
    const Vector x = random_vector(nc, rng), y = random_vector(nr, rng);
    const Scalar lhs = dot(spmv(m, x), y);
    const Scalar rhs = dot(x, spmv_adjoint(m, y));
    const double scale = std::max(1.0, norm_estimate(m) * norm2(x) * norm2(y));
    CHECK(std::abs(lhs - rhs) <= 1e-13 * scale);
    // the explicit adjoint agrees too
    CHECK(rel_diff(spmv(m.adjoint(), y), spmv_adjoint(m, y)) <= 1e-15);
  }
}

TEST_CASE("permute_rows") {
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  const SparseMatrix id = permute_rows(Permutation(std::vector<Index>{0, 1}), m);
  CHECK(std::equal(id.values().begin(), id.values().end(), m.values().begin()));
  CHECK(std::equal(id.row_idx().begin(), id.row_idx().end(), m.row_idx().begin()));
  const SparseMatrix sw = permute_rows(Permutation(std::vector<Index>{1, 0}), m);
  CHECK(sw.to_dense()(0, 1) == Scalar{2.0});
  CHECK(sw.to_dense()(1, 0) == Scalar{1.0});
  CHECK(sw.at(0, 0) == Scalar{});
  CHECK_THROWS_AS(permute_rows(Permutation(std::vector<Index>{0, 1, 2}), m), DimensionError);
  CHECK_THROWS(Permutation(std::vector<Index>{0, 0}));
}

TEST_CASE("permutation round trip is exact") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + rng() % 20;
    std::vector<Index> f(n);
    std::iota(f.begin(), f.end(), Index{0});
    std::shuffle(f.begin(), f.end(), rng);
    const Permutation p(f);
    const SparseMatrix m = random_sparse(n, 1 + rng() % 10, 0.4, rng);
    const SparseMatrix back = permute_rows(p.inverse(), permute_rows(p, m));
    REQUIRE(back.nnz() == m.nnz());
    CHECK(std::equal(back.values().begin(), back.values().end(), m.values().begin()));
    CHECK(std::equal(back.row_idx().begin(), back.row_idx().end(), m.row_idx().begin()));
    // (P M)[forward[i], :] = M[i, :]
    const SparseMatrix pm = permute_rows(p, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m.ncols(); ++j) CHECK(pm.at(p[i], j) == m.at(i, j));
    const Vector x = random_vector(n, rng);
    CHECK(p.apply_inverse(p.apply(x)) == x);
  }
}

TEST_CASE("norm_estimate is the one-norm") {
  CHECK(norm_estimate(SparseMatrix::identity(4)) == 1.0);
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, -3.0}, {1, 0, 2.0}, {1, 1, 4.0}});
  CHECK(norm_estimate(m) == 7.0);
  CHECK(norm_estimate(SparseMatrix(3, 3)) == 0.0);
}

TEST_CASE("scalar kernels") {
  const Vector x{Scalar{0.0, 1.0}, 2.0};
  CHECK(dot(x, x) == Scalar{5.0});
  CHECK(dot(Vector{Scalar{0.0, 1.0}}, Vector{1.0}) == Scalar{0.0, -1.0});
  CHECK(norm2(x) == Catch::Approx(std::sqrt(5.0)));
  // no overflow for huge entries
  CHECK(std::isfinite(norm2(Vector{1e200, 1e200})));
  CHECK(norm2(normalized(x)) == Catch::Approx(1.0));
  CHECK(subspace_angle(x, Vector{Scalar{0.0, 2.0} * x[0], Scalar{0.0, 2.0} * x[1]}) <= 1e-15);
  CHECK_THROWS_AS(dot(x, Vector{1.0}), DimensionError);
}
