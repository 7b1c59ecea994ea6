#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "ce/equilibrium.hpp"
#include "ce/linalg.hpp"

namespace ce {

struct SolverConfig {
  double tol = 1e-8;            // stop once the residual is <= tol
  std::size_t max_iter = 10000;
  double rho = 0.5;             // Mann relaxation
  std::size_t krylov_dim = 10;  // JFNK basis size per outer step
  double fd_eps = 1e-7;         // relative finite-difference step
  bool freeze_jacobian = false; // Newton: nonlinear blocks only at the start point
  double divergence_threshold = 1e12;
  // Reference solution for the error column of the trace.
  std::optional<StackedPoint> reference;
  bool record_iterates = false;

  void validate() const;
};

// Mann iteration w <- (1 - rho) w + rho T(w). rho = 0.5 is what the
// experiments call ADMM.
CESolution mann_solve(const Problem& p, const StackedPoint& v0, const SolverConfig& cfg);

// v <- (I - H) v + H T(v) for symmetric positive definite H with eigenvalues
// below 1. Throws BadPreconditioner otherwise. With cfg.reference set, the
// trace also records ||v - v_ref||_{H^-1}.
CESolution preconditioned_mann_solve(const Problem& p, const StackedPoint& v0, const Matrix& h,
                                     const SolverConfig& cfg);

enum class NewtonTarget {
  AgentsMinusAverage,  // F - G
  FixedPointMap,       // T - I ("Newton Mann")
};

// Dense Newton with full steps. Affine agents contribute their exact linear
// part; nonlinear agents are differentiated by forward differences with step
// fd_eps (1 + |v_j|). Requires nN <= 2000.
CESolution newton_solve(const Problem& p, const StackedPoint& v0, NewtonTarget target,
                        const SolverConfig& cfg);

// Jacobian-free Newton-Krylov on F - G: each outer step builds an Arnoldi basis
// of dimension cfg.krylov_dim from finite-difference Jacobian products, solves
// the Hessenberg least-squares problem and takes the full step.
CESolution jfnk_solve(const Problem& p, const StackedPoint& v0, const SolverConfig& cfg);

// Forward-difference Jacobian of a map R^m -> R^m at x, column j using step
// fd_eps (1 + |x_j|).
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& map, const Vector& x, double fd_eps);

std::string to_string(SolverStatus status);

}  // namespace ce
