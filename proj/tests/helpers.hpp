#pragma once

#include <random>

#include <sgep/sgep.hpp>

namespace testing {

using namespace sgep;

inline DenseMatrix random_dense(Index nr, Index nc, std::mt19937_64& rng, bool complex_entries = true) {
  std::normal_distribution<double> g;
  DenseMatrix m(nr, nc);
  for (Index j = 0; j < nc; ++j)
    for (Index i = 0; i < nr; ++i) m(i, j) = {g(rng), complex_entries ? g(rng) : 0.0};
  return m;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Scalar& s : v) s = {g(rng), g(rng)};
  return v;
}

inline SparseMatrix random_sparse(Index nr, Index nc, double density, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  std::vector<Triplet> t;
  for (Index j = 0; j < nc; ++j)
    for (Index i = 0; i < nr; ++i)
      if (u(rng) < density) t.push_back({i, j, {g(rng), g(rng)}});
  return SparseMatrix::from_triplets(nr, nc, std::move(t));
}

// rank-r product X Y^* of Gaussian factors
inline DenseMatrix random_rank(Index nr, Index nc, Index r, std::mt19937_64& rng) {
  return random_dense(nr, r, rng) * random_dense(nc, r, rng).adjoint();
}

// naive dense product, no shared code with the library kernels
inline Vector naive_matvec(const DenseMatrix& a, const Vector& x) {
  Vector y(a.nrows());
  for (Index i = 0; i < a.nrows(); ++i)
    for (Index j = 0; j < a.ncols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double d = 0.0;
  for (Index j = 0; j < a.ncols(); ++j)
    for (Index i = 0; i < a.nrows(); ++i) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

inline double rel_diff(const Vector& a, const Vector& b) {
  return norm2(subtract(a, b)) / std::max(norm2(b), 1e-300);
}

// min over permutations would be exact; greedy nearest matching suffices for
// well separated sets
inline double set_distance(Vector a, Vector b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const Scalar& x : a) {
    Index best = 0;
    for (Index j = 1; j < b.size(); ++j)
      if (std::abs(b[j] - x) < std::abs(b[best] - x)) best = j;
    worst = std::max(worst, std::abs(b[best] - x));
    b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return worst;
}

// 4x4 toy pencil: one finite eigenvalue at 1, normal rank 3
inline Pencil toy() { return gen_kronecker_toy().pencil; }

} // namespace testing
