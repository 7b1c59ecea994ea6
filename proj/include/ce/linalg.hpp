#pragma once

// Dense vectors and matrices with the handful of factorizations the
// equilibrium solvers need. Storage is row-major std::vector<double>.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace ce {

using Complex = std::complex<double>;

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator-(Vector a);
Vector operator*(double s, Vector v);
Vector operator*(Vector v, double s);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
double norm_inf(const Vector& v);
// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;
  void set_column(std::size_t j, const Vector& v);

  const std::vector<double>& values() const noexcept { return data_; }

  Matrix transpose() const;
  double max_abs() const noexcept;
  double frobenius_norm() const noexcept;
  bool is_symmetric(double rel_tol = 1e-12) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

// LU with partial pivoting. A pivot is rejected when its magnitude does not
// exceed 1e-12 * max|A|.
class LuFactorization {
 public:
  explicit LuFactorization(const Matrix& a);

  std::size_t size() const noexcept { return lu_.rows(); }
  Vector solve(const Vector& b) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

Vector lu_solve(const Matrix& a, const Vector& b);

// Lower-triangular L with A = L L^T. Throws NotPositiveDefinite for
// non-symmetric input or a non-positive pivot.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& a);

  Vector solve(const Vector& b) const;
  // Solves L z = b.
  Vector solve_lower(const Vector& b) const;
  const Matrix& factor() const noexcept { return l_; }

 private:
  Matrix l_;
};

// argmin ||A x - b|| via Householder QR; A is m x k with m >= k.
Vector qr_least_squares(const Matrix& a, const Vector& b);

// Thin Q factor (m x k, orthonormal columns) of a Householder QR.
Matrix qr_orthonormal_factor(const Matrix& a);

std::vector<Complex> eigenvalues(const Matrix& a);

// Largest singular value by power iteration on A^T A.
double spectral_norm(const Matrix& a);

// sqrt(v^T H^{-1} v) for symmetric positive definite H.
double weighted_norm_hinv(const Vector& v, const Matrix& h);

// Row-major CSV, 17 significant digits.
void write_csv(std::ostream& out, const Matrix& a);
void write_csv(std::ostream& out, const Vector& v);

}  // namespace ce
