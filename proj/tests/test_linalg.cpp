#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ce/error.hpp"
#include "ce/linalg.hpp"
#include "support.hpp"

using namespace ce;
using ce::testing::multiset_distance;
using ce::testing::random_matrix;
using ce::testing::random_orthogonal;
using ce::testing::random_spd;
using ce::testing::random_vector;

namespace {

// Characteristic polynomial coefficients c_0..c_n (monic, c_0 = 1) by
// Faddeev-LeVerrier, then roots by Durand-Kerner. Independent of the
// library's eigenvalue routine; fine for small n.
std::vector<Complex> char_poly_roots(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  Matrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix am = a * m;
    for (std::size_t i = 0; i < n; ++i) am(i, i) += c[k - 1];
    m = am;
    const Matrix amk = a * m;
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += amk(i, i);
    c[k] = -tr / static_cast<double>(k);
  }
  auto poly = [&](Complex z) {
    Complex acc = 1.0;
    for (std::size_t k = 1; k <= n; ++k) acc = acc * z + c[k];
    return acc;
  };
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(Complex(0.4, 0.9), static_cast<double>(i));
  for (int it = 0; it < 2000; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex den = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const Complex step = poly(z[i]) / den;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  return z;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("lu_solve on identity and diagonal systems") {
  CHECK(lu_solve(Matrix::identity(2), Vector{3, 4}) == Vector{3, 4});
  const Vector x = lu_solve(Matrix{{2, 0}, {0, 4}}, Vector{2, 4});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("lu_solve of the toy prox system satisfies its equations") {
  const Matrix a{{0.3, 0.6}, {0.4, 0.5}};
  const Vector y{1, 1};
  const Vector v{0.7, -1.3};
  Matrix sys = Matrix::identity(2) + a.transpose() * a;
  const Vector rhs = v + a.transpose() * y;
  const Vector x = lu_solve(sys, rhs);
  CHECK(norm(sys * x - rhs) <= 1e-12);
}

TEST_CASE("lu_solve residual is small for seeded well-conditioned systems") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 9;
    Matrix a = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
    const Vector b = random_vector(rng, n);
    CHECK(norm(a * lu_solve(a, b) - b) <= 1e-9 * norm(b));
  }
}

TEST_CASE("lu rejects singular and non-square input") {
  CHECK_THROWS_AS(lu_solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), Error);
  try {
    lu_solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularMatrix);
  }
  try {
    lu_solve(Matrix(2, 3), Vector(2));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("lu inverse") {
  Rng rng(9);
  Matrix a = random_matrix(rng, 5, 5);
  for (std::size_t i = 0; i < 5; ++i) a(i, i) += 4.0;
  const Matrix prod = a * LuFactorization(a).inverse();
  CHECK((prod - Matrix::identity(5)).max_abs() <= 1e-12);
}

TEST_CASE("qr_least_squares small cases") {
  const Vector b{0.3, -2.0, 5.0};
  const Vector x = qr_least_squares(Matrix::identity(3), b);
  CHECK(norm(x - b) <= 1e-14);
  const Vector m = qr_least_squares(Matrix{{1}, {1}}, Vector{0, 2});
  REQUIRE(m.size() == 1);
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("qr_least_squares matches the normal equations") {
  Rng rng(5);
  const Matrix a = random_matrix(rng, 10, 4);
  const Vector b = random_vector(rng, 10);
  const Vector x = qr_least_squares(a, b);
  const Vector oracle = lu_solve(a.transpose() * a, a.transpose() * b);
  CHECK(norm_inf(x - oracle) <= 1e-9);
}

TEST_CASE("qr_least_squares reports rank deficiency") {
  try {
    qr_least_squares(Matrix{{1, 2}, {2, 4}, {3, 6}}, Vector{1, 2, 3});
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("qr_orthonormal_factor has orthonormal columns") {
  Rng rng(1);
  const Matrix q = qr_orthonormal_factor(random_matrix(rng, 7, 4));
  CHECK((q.transpose() * q - Matrix::identity(4)).max_abs() <= 1e-13);
}

TEST_CASE("eigenvalues of simple matrices") {
  CHECK(multiset_distance(eigenvalues(Matrix::diagonal(Vector{1, 2, 3})), {1.0, 2.0, 3.0}) <= 1e-12);
  CHECK(multiset_distance(eigenvalues(Matrix{{0, -1}, {1, 0}}), {Complex(0, 1), Complex(0, -1)}) <= 1e-12);
}

TEST_CASE("eigenvalues agree with the characteristic-polynomial oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Matrix a = random_matrix(rng, n, n);
    CHECK(multiset_distance(eigenvalues(a), char_poly_roots(a)) <= 1e-8);
  }
}

TEST_CASE("eigenvalues are invariant under orthogonal similarity") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial % 6;
    const Matrix a = random_matrix(rng, n, n);
    const Matrix q = random_orthogonal(rng, n);
    CHECK(multiset_distance(eigenvalues(a), eigenvalues(q * a * q.transpose())) <= 1e-7);
  }
}

TEST_CASE("spectral_norm small cases") {
  CHECK(spectral_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix::diagonal(Vector{3, -5})) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix(3, 3)) == 0.0);
}

TEST_CASE("spectral_norm matches the largest eigenvalue of A^T A") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = random_matrix(rng, 6, 6);
    double top = 0.0;
    for (const Complex& z : char_poly_roots(a.transpose() * a)) top = std::max(top, z.real());
    CHECK(spectral_norm(a) == doctest::Approx(std::sqrt(top)).epsilon(1e-9));
  }
}

TEST_CASE("spectral_norm bounds every eigenvalue modulus") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(rng, 8, 8);
    const double s = spectral_norm(a);
    for (const Complex& z : eigenvalues(a)) CHECK(s >= std::abs(z) - 1e-10);
  }
}

TEST_CASE("weighted_norm_hinv") {
  Rng rng(41);
  const Vector v = random_vector(rng, 6);
  CHECK(std::abs(weighted_norm_hinv(v, Matrix::identity(6)) - norm(v)) <= 1e-14);
  CHECK(weighted_norm_hinv(Vector{2}, Matrix{{4}}) == doctest::Approx(1.0).epsilon(1e-15));
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix h = random_spd(rng, 6, 0.1, 0.9);
    const Vector w = random_vector(rng, 6);
    const Matrix hinv = LuFactorization(h).inverse();
    const double oracle = std::sqrt(dot(w, hinv * w));
    CHECK(std::abs(weighted_norm_hinv(w, h) - oracle) <= 1e-10);
  }
}

TEST_CASE("cholesky rejects indefinite and non-symmetric input") {
  try {
    Cholesky(Matrix{{1, 2}, {2, 1}});
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
  }
  CHECK_THROWS_AS(Cholesky(Matrix{{2, 1}, {0, 2}}), Error);
}

TEST_CASE("csv output uses 17 significant digits") {
  std::ostringstream out;
  write_csv(out, Vector{1.0 / 3.0});
  CHECK(out.str().find("0.33333333333333331") != std::string::npos);
}

}  // TEST_SUITE
