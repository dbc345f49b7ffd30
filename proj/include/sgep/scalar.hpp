#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace sgep {

using Scalar = std::complex<double>;
using Vector = std::vector<Scalar>;
using Index = std::size_t;

/// Euclidean inner product, conjugate-linear in the first argument.
inline Scalar dot(std::span<const Scalar> x, std::span<const Scalar> y) {
  require_dims(x.size() == y.size(), "dot: length mismatch");
  Scalar s{0.0, 0.0};
  for (Index i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

inline double norm2(std::span<const Scalar> x) {
  // scaled accumulation avoids overflow for large entries
  double scale = 0.0, ssq = 1.0;
  for (const Scalar& v : x) {
    for (double c : {v.real(), v.imag()}) {
      if (c == 0.0) continue;
      const double a = std::abs(c);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

inline double norm_inf(std::span<const Scalar> x) {
  double m = 0.0;
  for (const Scalar& v : x) m = std::max(m, std::abs(v));
  return m;
}

/// y += a * x
inline void axpy(Scalar a, std::span<const Scalar> x, std::span<Scalar> y) {
  require_dims(x.size() == y.size(), "axpy: length mismatch");
  for (Index i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scale(Scalar a, std::span<Scalar> x) {
  for (Scalar& v : x) v *= a;
}

inline Vector subtract(std::span<const Scalar> x, std::span<const Scalar> y) {
  require_dims(x.size() == y.size(), "subtract: length mismatch");
  Vector r(x.size());
  for (Index i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

/// Returns x / ||x||_2; throws on a zero vector.
inline Vector normalized(std::span<const Scalar> x) {
  const double nrm = norm2(x);
  if (nrm == 0.0) throw NumericalError("normalized: zero vector");
  Vector r(x.begin(), x.end());
  scale(1.0 / nrm, r);
  return r;
}

/// Angle between the lines spanned by x and y (phase independent).
inline double subspace_angle(std::span<const Scalar> x, std::span<const Scalar> y) {
  const double c = std::abs(dot(x, y)) / (norm2(x) * norm2(y));
  // acos is ill-conditioned near 1; use the sine form instead
  const double s2 = std::max(0.0, 1.0 - c * c);
  if (s2 > 1e-8) return std::acos(std::min(1.0, c));
  // ||x - (x.y/|x.y|) y|| for unit vectors
  const Vector xu = normalized(x), yu = normalized(y);
  const Scalar d = dot(yu, xu);
  const Scalar ph = d == Scalar{} ? Scalar{1.0} : d / std::abs(d);
  Vector r(xu.size());
  for (Index i = 0; i < r.size(); ++i) r[i] = xu[i] - ph * yu[i];
  return norm2(r);
}

} // namespace sgep
