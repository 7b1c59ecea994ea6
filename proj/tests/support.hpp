#pragma once

// Seeded generators shared by the unit and acceptance tests.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <vector>

#include "ce/analysis.hpp"
#include "ce/linalg.hpp"
#include "ce/rng.hpp"

namespace ce::testing {

inline Vector random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (double& x : v) x = lo + (hi - lo) * rng.next_uniform();
  return v;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  Matrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = lo + (hi - lo) * rng.next_uniform();
  return a;
}

inline Matrix random_orthogonal(Rng& rng, std::size_t n) {
  return qr_orthonormal_factor(random_matrix(rng, n, n));
}

// Q diag(d) Q^T with d uniform in [lo, hi].
inline Matrix random_spd(Rng& rng, std::size_t n, double lo, double hi) {
  const Matrix q = random_orthogonal(rng, n);
  Matrix d = Matrix::diagonal(random_vector(rng, n, lo, hi));
  Matrix s = q * d * q.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) s(j, i) = s(i, j);
  return s;
}

// Least-squares objective with a well-conditioned positive definite Hessian.
inline QuadraticObjective random_quadratic(Rng& rng, std::size_t n) {
  const Matrix a = random_matrix(rng, n + 3, n);
  const Vector y = random_vector(rng, n + 3, -2.0, 2.0);
  return QuadraticObjective::least_squares(a, y);
}

// Greedy multiset matching; returns the largest pairing distance.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return 1e300;
  double worst = 0.0;
  for (const Complex& z : a) {
    auto best = std::min_element(b.begin(), b.end(),
                                 [&z](const Complex& p, const Complex& q) { return std::abs(p - z) < std::abs(q - z); });
    worst = std::max(worst, std::abs(*best - z));
    b.erase(best);
  }
  return worst;
}

}  // namespace ce::testing
