#include "ce/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "ce/error.hpp"

namespace ce {

namespace {

void check_same_size(std::size_t a, std::size_t b, const char* where) {
  require(a == b, ErrorCode::DimensionMismatch,
          std::string(where) + ": sizes " + std::to_string(a) + " and " + std::to_string(b));
}

constexpr double kPivotTolerance = 1e-12;

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
  check_same_size(size(), other.size(), "vector +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  check_same_size(size(), other.size(), "vector -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

bool Vector::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator-(Vector a) { return a *= -1.0; }
Vector operator*(double s, Vector v) { return v *= s; }
Vector operator*(Vector v, double s) { return v *= s; }

double dot(const Vector& a, const Vector& b) {
  check_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void axpy(double alpha, const Vector& x, Vector& y) {
  check_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  check_same_size(rows * cols, data_.size(), "matrix data");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    check_same_size(r.size(), cols_, "matrix row");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_column(std::size_t j, const Vector& v) {
  check_same_size(v.size(), rows_, "set_column");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double Matrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

bool Matrix::is_symmetric(double rel_tol) const {
  if (!is_square()) return false;
  const double tol = rel_tol * std::max(1.0, max_abs());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch, "matrix +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, ErrorCode::DimensionMismatch, "matrix -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  check_same_size(a.cols(), b.rows(), "matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  check_same_size(a.cols(), x.size(), "matrix-vector product");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

LuFactorization::LuFactorization(const Matrix& a) : lu_(a), perm_(a.rows()) {
  require(a.is_square(), ErrorCode::DimensionMismatch, "LU needs a square matrix");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
  const double threshold = kPivotTolerance * a.max_abs();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (!(best > threshold) || best == 0.0)
      throw Error(ErrorCode::SingularMatrix, "pivot " + std::to_string(k) + " underflows threshold");
    if (p != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
      std::swap(perm_[k], perm_[p]);
    }
    const double pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) / pivot;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
}

Vector LuFactorization::solve(const Vector& b) const {
  const std::size_t n = lu_.rows();
  check_same_size(b.size(), n, "LU solve");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
    x[i] = s / lu_(i, i);
  }
  return x;
}

Matrix LuFactorization::inverse() const {
  const std::size_t n = lu_.rows();
  Matrix inv(n, n);
  Vector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    inv.set_column(j, solve(e));
    e[j] = 0.0;
  }
  return inv;
}

Vector lu_solve(const Matrix& a, const Vector& b) { return LuFactorization(a).solve(b); }

Cholesky::Cholesky(const Matrix& a) : l_(a.rows(), a.cols()) {
  require(a.is_square(), ErrorCode::DimensionMismatch, "Cholesky needs a square matrix");
  require(a.is_symmetric(), ErrorCode::NotPositiveDefinite, "matrix is not symmetric");
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "non-positive pivot at " + std::to_string(j));
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / ljj;
    }
  }
}

Vector Cholesky::solve_lower(const Vector& b) const {
  const std::size_t n = l_.rows();
  check_same_size(b.size(), n, "Cholesky solve");
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * z[k];
    z[i] = s / l_(i, i);
  }
  return z;
}

Vector Cholesky::solve(const Vector& b) const {
  Vector x = solve_lower(b);
  const std::size_t n = l_.rows();
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l_(k, i) * x[k];
    x[i] = s / l_(i, i);
  }
  return x;
}

namespace {

// In-place Householder QR. On return the upper triangle of `r` holds R and
// `reflectors[k]` holds the unit Householder vector for column k (zero when
// the column was already reduced).
struct HouseholderQr {
  Matrix r;
  std::vector<Vector> reflectors;

  explicit HouseholderQr(const Matrix& a) : r(a) {
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    require(m >= k, ErrorCode::DimensionMismatch, "QR needs rows >= cols");
    reflectors.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
      Vector v(m - j);
      double sigma = 0.0;
      for (std::size_t i = j; i < m; ++i) {
        v[i - j] = r(i, j);
        sigma += r(i, j) * r(i, j);
      }
      const double alpha = std::sqrt(sigma);
      if (alpha == 0.0) {
        reflectors.emplace_back(m - j);
        continue;
      }
      v[0] += v[0] >= 0.0 ? alpha : -alpha;
      const double vnorm = norm(v);
      v *= 1.0 / vnorm;
      for (std::size_t c = j; c < k; ++c) {
        double s = 0.0;
        for (std::size_t i = j; i < m; ++i) s += v[i - j] * r(i, c);
        for (std::size_t i = j; i < m; ++i) r(i, c) -= 2.0 * s * v[i - j];
      }
      reflectors.push_back(std::move(v));
    }
  }

  void apply_qt(Vector& b) const {
    const std::size_t m = r.rows();
    for (std::size_t j = 0; j < reflectors.size(); ++j) {
      const Vector& v = reflectors[j];
      double s = 0.0;
      for (std::size_t i = j; i < m; ++i) s += v[i - j] * b[i];
      for (std::size_t i = j; i < m; ++i) b[i] -= 2.0 * s * v[i - j];
    }
  }

  void apply_q(Vector& b) const {
    const std::size_t m = r.rows();
    for (std::size_t j = reflectors.size(); j-- > 0;) {
      const Vector& v = reflectors[j];
      double s = 0.0;
      for (std::size_t i = j; i < m; ++i) s += v[i - j] * b[i];
      for (std::size_t i = j; i < m; ++i) b[i] -= 2.0 * s * v[i - j];
    }
  }
};

}  // namespace

Vector qr_least_squares(const Matrix& a, const Vector& b) {
  check_same_size(a.rows(), b.size(), "least squares rhs");
  const std::size_t k = a.cols();
  double scale = 0.0;
  for (std::size_t j = 0; j < k; ++j) scale = std::max(scale, norm(a.column(j)));

  HouseholderQr qr(a);
  for (std::size_t j = 0; j < k; ++j) {
    if (!(std::abs(qr.r(j, j)) > kPivotTolerance * scale))
      throw Error(ErrorCode::RankDeficient, "R(" + std::to_string(j) + "," + std::to_string(j) + ") vanishes");
  }
  Vector qtb = b;
  qr.apply_qt(qtb);
  Vector x(k);
  for (std::size_t i = k; i-- > 0;) {
    double s = qtb[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= qr.r(i, j) * x[j];
    x[i] = s / qr.r(i, i);
  }
  return x;
}

Matrix qr_orthonormal_factor(const Matrix& a) {
  HouseholderQr qr(a);
  Matrix q(a.rows(), a.cols());
  Vector e(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    qr.apply_q(e);
    q.set_column(j, e);
  }
  return q;
}

std::vector<Complex> eigenvalues(const Matrix& a) {
  require(a.is_square(), ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
  const auto n = static_cast<Eigen::Index>(a.rows());
  if (n == 0) return {};
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "QR iteration did not converge");
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return out;
}

double spectral_norm(const Matrix& a) {
  const std::size_t n = a.cols();
  if (n == 0 || a.max_abs() == 0.0) return 0.0;
  const Matrix at = a.transpose();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(1.0 + 7.0 * static_cast<double>(i));
  x *= 1.0 / norm(x);

  double estimate = 0.0;
  constexpr int kMaxIterations = 20000;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vector ax = a * x;
    const double next = dot(ax, ax);  // Rayleigh quotient of A^T A
    Vector y = at * ax;
    const double ny = norm(y);
    if (ny == 0.0) return std::sqrt(next);
    x = std::move(y);
    x *= 1.0 / ny;
    if (it >= 1 && std::abs(next - estimate) <= 1e-14 * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::sqrt(estimate);
}

double weighted_norm_hinv(const Vector& v, const Matrix& h) {
  const Cholesky chol(h);
  return norm(chol.solve_lower(v));
}

namespace {

std::ostream& put(std::ostream& out, double x) {
  return out << std::setprecision(17) << x;
}

}  // namespace

void write_csv(std::ostream& out, const Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      put(out, a(i, j));
    }
    out << '\n';
  }
}

void write_csv(std::ostream& out, const Vector& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    put(out, v[i]);
  }
  out << '\n';
}

}  // namespace ce
