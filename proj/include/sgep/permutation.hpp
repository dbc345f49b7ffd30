#pragma once

#include <numeric>
#include <vector>

#include "sparse_matrix.hpp"

namespace sgep {

/// Row permutation: forward[i] is the destination row of source row i,
/// so (P M)[forward[i], :] = M[i, :].
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(Index n) : forward_(n) { std::iota(forward_.begin(), forward_.end(), Index{0}); }
  explicit Permutation(std::vector<Index> forward) : forward_(std::move(forward)) {
    std::vector<char> seen(forward_.size(), 0);
    for (Index d : forward_) {
      if (d >= forward_.size() || seen[d]) throw ArgumentError("Permutation: not a bijection");
      seen[d] = 1;
    }
  }

  Index size() const { return forward_.size(); }
  Index operator[](Index i) const { return forward_[i]; }
  const std::vector<Index>& forward() const { return forward_; }

  Permutation inverse() const {
    std::vector<Index> inv(forward_.size());
    for (Index i = 0; i < forward_.size(); ++i) inv[forward_[i]] = i;
    return Permutation(std::move(inv));
  }

  /// (P x)[forward[i]] = x[i]
  template <typename T>
  std::vector<T> apply(const std::vector<T>& x) const {
    require_dims(x.size() == size(), "Permutation::apply: length mismatch");
    std::vector<T> y(x.size());
    for (Index i = 0; i < x.size(); ++i) y[forward_[i]] = x[i];
    return y;
  }

  /// (P^T y)[i] = y[forward[i]]
  template <typename T>
  std::vector<T> apply_inverse(const std::vector<T>& y) const {
    require_dims(y.size() == size(), "Permutation::apply_inverse: length mismatch");
    std::vector<T> x(y.size());
    for (Index i = 0; i < y.size(); ++i) x[i] = y[forward_[i]];
    return x;
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;

private:
  std::vector<Index> forward_;
};

inline SparseMatrix permute_rows(const Permutation& p, const SparseMatrix& m) {
  require_dims(p.size() == m.nrows(), "permute_rows: size mismatch");
  std::vector<Triplet> t = m.triplets();
  for (Triplet& e : t) e.row = p[e.row];
  return SparseMatrix::from_triplets(m.nrows(), m.ncols(), std::move(t));
}

} // namespace sgep
