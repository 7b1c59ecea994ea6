#include "ce/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "ce/error.hpp"
#include "ce/solvers.hpp"

namespace ce {

QuadraticObjective::QuadraticObjective(Matrix p, Vector q, double c)
    : p_(std::move(p)), q_(std::move(q)), c_(c) {
  require(p_.is_square() && p_.rows() == q_.size(), ErrorCode::DimensionMismatch, "quadratic objective shape");
  require(p_.is_symmetric(), ErrorCode::InvalidArgument, "quadratic objective needs a symmetric P");
  for (const Complex& lambda : eigenvalues(p_))
    require(lambda.real() >= -1e-10, ErrorCode::InvalidArgument, "quadratic objective needs P >= 0");
}

QuadraticObjective QuadraticObjective::least_squares(const Matrix& a, const Vector& y) {
  const Matrix at = a.transpose();
  Matrix p = at * a;
  // symmetrize away rounding in A^T A
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) p(j, i) = p(i, j);
  return QuadraticObjective(std::move(p), -(at * y), 0.5 * dot(y, y));
}

double QuadraticObjective::value(const Vector& x) const {
  return 0.5 * dot(x, p_ * x) + dot(q_, x) + c_;
}

Vector QuadraticObjective::gradient(const Vector& x) const { return p_ * x + q_; }

namespace {

void require_affine(const Problem& p) {
  for (const Agent& a : p.agents())
    require(a.has_affine_part(), ErrorCode::InvalidArgument, "agent " + a.label() + " is not affine");
}

}  // namespace

StackedPoint affine_ce_oracle(const Problem& p) {
  require_affine(p);
  const std::size_t n = p.dim();
  const std::size_t nb = p.num_agents();
  const std::size_t m = p.stacked_dim();
  Matrix system(m, m);
  Vector rhs(m);
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const AffineMap& f = p.agents()[bi].affine_part();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) system(bi * n + r, bi * n + c) = f.linear(r, c);
      for (std::size_t bj = 0; bj < nb; ++bj) system(bi * n + r, bj * n + r) -= p.weights()[bj];
      rhs[bi * n + r] = -f.offset[r];
    }
  }
  try {
    return StackedPoint(lu_solve(system, rhs), nb);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    throw Error(ErrorCode::SingularSystem, std::string("equilibrium is not unique: ") + e.what());
  }
}

Vector consensus_opt_oracle(const std::vector<QuadraticObjective>& fs, const Weights& mu) {
  require(!fs.empty() && fs.size() == mu.size(), ErrorCode::DimensionMismatch, "objective count vs weights");
  const std::size_t n = fs.front().linear().size();
  Matrix p(n, n);
  Vector q(n);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    require(fs[i].linear().size() == n, ErrorCode::DimensionMismatch, "objective dimensions differ");
    p += mu[i] * fs[i].hessian();
    axpy(mu[i], fs[i].linear(), q);
  }
  try {
    return Cholesky(p).solve(-q);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    throw Error(ErrorCode::SingularSystem, std::string("weighted Hessian is not positive definite: ") + e.what());
  }
}

Matrix affine_fixed_point_jacobian(const Problem& p) {
  require_affine(p);
  const std::size_t n = p.dim();
  const std::size_t nb = p.num_agents();
  const std::size_t m = p.stacked_dim();
  // Row block i of (2G - I)(2M - I) is 2 sum_j mu_j R_j - R_i with R = 2M - I
  // block diagonal.
  std::vector<Matrix> reflected(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    reflected[b] = 2.0 * p.agents()[b].affine_part().linear;
    for (std::size_t k = 0; k < n; ++k) reflected[b](k, k) -= 1.0;
  }
  Matrix jac(m, m);
  for (std::size_t bi = 0; bi < nb; ++bi) {
    for (std::size_t bj = 0; bj < nb; ++bj) {
      const double coef = 2.0 * p.weights()[bj] - (bi == bj ? 1.0 : 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) jac(bi * n + r, bj * n + c) = coef * reflected[bj](r, c);
    }
  }
  return jac;
}

Matrix fixed_point_jacobian(const Problem& p, const StackedPoint& v, double fd_eps) {
  p.check(v);
  const bool affine = std::all_of(p.agents().begin(), p.agents().end(),
                                  [](const Agent& a) { return a.has_affine_part(); });
  if (affine) return affine_fixed_point_jacobian(p);
  const std::size_t nb = p.num_agents();
  auto map = [&p, nb](const Vector& x) { return p.reflected_map(StackedPoint(x, nb)).flat(); };
  return fd_jacobian(map, v.flat(), fd_eps);
}

std::vector<Complex> relaxed_spectrum(const std::vector<Complex>& eigenvalues, double rho) {
  std::vector<Complex> out;
  out.reserve(eigenvalues.size());
  for (const Complex& lambda : eigenvalues) out.push_back(rho * lambda + (1.0 - rho));
  return out;
}

std::vector<Complex> mann_spectrum_check(const SpectrumReport& report, double rho) {
  return relaxed_spectrum(report.eigenvalues, rho);
}

double max_modulus(const std::vector<Complex>& values) {
  double m = 0.0;
  for (const Complex& z : values) m = std::max(m, std::abs(z));
  return m;
}

RelaxationChoice optimal_relaxation(const std::vector<Complex>& eigenvalues, double tol) {
  auto radius = [&eigenvalues](double rho) {
    double m = 0.0;
    for (const Complex& lambda : eigenvalues) m = std::max(m, std::abs(rho * lambda + (1.0 - rho)));
    return m;
  };
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = radius(x1);
  double f2 = radius(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = radius(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = radius(x2);
    }
  }
  double rho = std::clamp(0.5 * (lo + hi), tol, 1.0);
  double best = radius(rho);
  // The minimizer may sit on the boundary rho = 1.
  if (const double at_one = radius(1.0); at_one < best) {
    rho = 1.0;
    best = at_one;
  }
  return {rho, best};
}

SpectrumReport spectrum_of(const Matrix& jacobian) {
  SpectrumReport report;
  report.eigenvalues = eigenvalues(jacobian);
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  report.max_real = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.front().real();
  report.lipschitz = spectral_norm(jacobian);
  const RelaxationChoice choice = optimal_relaxation(report.eigenvalues);
  report.rho_star = choice.rho;
  report.rho_star_radius = choice.radius;
  return report;
}

SpectrumReport jacobian_spectrum(const Problem& p, const StackedPoint& v, double fd_eps) {
  return spectrum_of(fixed_point_jacobian(p, v, fd_eps));
}

void write_json(std::ostream& out, const SpectrumReport& report) {
  nlohmann::ordered_json j;
  auto eigs = nlohmann::json::array();
  for (const Complex& z : report.eigenvalues) eigs.push_back({z.real(), z.imag()});
  j["eigenvalues"] = std::move(eigs);
  j["max_real"] = report.max_real;
  j["lipschitz"] = report.lipschitz;
  j["rho_star"] = report.rho_star;
  j["rho_star_radius"] = report.rho_star_radius;
  out << j.dump(2) << '\n';
}

}  // namespace ce
