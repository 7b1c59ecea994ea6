#pragma once

#include <iosfwd>
#include <vector>

#include "ce/equilibrium.hpp"
#include "ce/linalg.hpp"

namespace ce {

// f(x) = x^T P x / 2 + q^T x + c with P symmetric positive semidefinite.
class QuadraticObjective {
 public:
  QuadraticObjective(Matrix p, Vector q, double c = 0.0);

  // ||A x - y||^2 / 2
  static QuadraticObjective least_squares(const Matrix& a, const Vector& y);

  const Matrix& hessian() const noexcept { return p_; }
  const Vector& linear() const noexcept { return q_; }
  double constant() const noexcept { return c_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

 private:
  Matrix p_;
  Vector q_;
  double c_;
};

// Exact equilibrium of a problem whose agents are all affine: solves
// (blockdiag(M_i) - G) v = -b. Throws SingularSystem when it is not unique.
StackedPoint affine_ce_oracle(const Problem& p);

// argmin sum_i mu_i f_i, from (sum mu_i P_i) x = -sum mu_i q_i.
Vector consensus_opt_oracle(const std::vector<QuadraticObjective>& fs, const Weights& mu);

// Exact Jacobian of the reflected fixed-point map for affine agents.
Matrix affine_fixed_point_jacobian(const Problem& p);

// Jacobian of the reflected fixed-point map at v: exact when every agent is
// affine, forward differences otherwise.
Matrix fixed_point_jacobian(const Problem& p, const StackedPoint& v, double fd_eps = 1e-7);

struct SpectrumReport {
  std::vector<Complex> eigenvalues;
  double max_real = 0.0;
  double lipschitz = 0.0;
  // Relaxation minimizing max_j |rho lambda_j + 1 - rho| over (0, 1].
  double rho_star = 1.0;
  double rho_star_radius = 0.0;
};

SpectrumReport spectrum_of(const Matrix& jacobian);
SpectrumReport jacobian_spectrum(const Problem& p, const StackedPoint& v, double fd_eps = 1e-7);

// {rho lambda_j + 1 - rho}
std::vector<Complex> relaxed_spectrum(const std::vector<Complex>& eigenvalues, double rho);
std::vector<Complex> mann_spectrum_check(const SpectrumReport& report, double rho);

double max_modulus(const std::vector<Complex>& values);

struct RelaxationChoice {
  double rho;
  double radius;
};

// Golden-section search on (0, 1]; the objective is convex in rho.
RelaxationChoice optimal_relaxation(const std::vector<Complex>& eigenvalues, double tol = 1e-6);

// {"eigenvalues": [[re, im], ...], "max_real": ..., ...}
void write_json(std::ostream& out, const SpectrumReport& report);

}  // namespace ce
