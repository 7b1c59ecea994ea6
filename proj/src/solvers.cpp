#include "ce/solvers.hpp"

#include <cmath>
#include <limits>

#include "ce/error.hpp"

namespace ce {

void SolverConfig::validate() const {
  require(tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
  require(rho > 0.0 && rho < 1.0, ErrorCode::InvalidArgument, "rho must lie in (0, 1)");
  require(krylov_dim >= 1, ErrorCode::InvalidArgument, "krylov_dim must be at least 1");
  require(fd_eps > 0.0, ErrorCode::InvalidArgument, "fd_eps must be positive");
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::Diverged: return "diverged";
  }
  return "unknown";
}

namespace {

// Shared bookkeeping: trace rows, stopping rule, divergence detection.
class IterationMonitor {
 public:
  IterationMonitor(const Problem& p, const SolverConfig& cfg) : p_(p), cfg_(cfg) {
    if (cfg_.reference) p_.check(*cfg_.reference);
  }

  // Records a row and returns true when iteration must stop.
  bool record(std::size_t iter, const StackedPoint& v, double residual) {
    double rmse = std::numeric_limits<double>::quiet_NaN();
    if (cfg_.reference) {
      rmse = norm(v.flat() - cfg_.reference->flat()) / std::sqrt(static_cast<double>(v.size()));
    }
    trace_.add(iter, residual, rmse, evals_);
    if (cfg_.record_iterates) trace_.iterates.push_back(v);
    iterations_ = iter;
    if (!std::isfinite(residual) || !v.flat().all_finite() || residual > cfg_.divergence_threshold) {
      status_ = SolverStatus::Diverged;
      return true;
    }
    if (residual <= cfg_.tol) {
      status_ = SolverStatus::Converged;
      return true;
    }
    if (iter >= cfg_.max_iter) {
      status_ = SolverStatus::MaxIterations;
      return true;
    }
    return false;
  }

  void count_evals(std::size_t n = 1) { evals_ += n; }
  RunTrace& trace() { return trace_; }

  CESolution finish(const StackedPoint& v) {
    CESolution s = extract_solution(p_, v, std::move(trace_));
    s.status = status_;
    s.converged = status_ == SolverStatus::Converged;
    s.iterations = iterations_;
    return s;
  }

 private:
  const Problem& p_;
  const SolverConfig& cfg_;
  RunTrace trace_;
  std::size_t evals_ = 0;
  std::size_t iterations_ = 0;
  SolverStatus status_ = SolverStatus::MaxIterations;
};

// Dense averaging matrix: block (i, j) is mu_j I.
Matrix averaging_matrix(const Problem& p) {
  const std::size_t n = p.dim();
  const std::size_t m = p.stacked_dim();
  Matrix g(m, m);
  for (std::size_t bi = 0; bi < p.num_agents(); ++bi)
    for (std::size_t bj = 0; bj < p.num_agents(); ++bj)
      for (std::size_t k = 0; k < n; ++k) g(bi * n + k, bj * n + k) = p.weights()[bj];
  return g;
}

void validate_preconditioner(const Matrix& h, std::size_t m) {
  require(h.rows() == m && h.cols() == m, ErrorCode::BadPreconditioner,
          "H must be " + std::to_string(m) + "x" + std::to_string(m));
  require(h.is_symmetric(), ErrorCode::BadPreconditioner, "H must be symmetric");
  for (const Complex& lambda : eigenvalues(h)) {
    require(std::abs(lambda.imag()) <= 1e-10 && lambda.real() > 0.0 && lambda.real() < 1.0,
            ErrorCode::BadPreconditioner, "H eigenvalues must lie in (0, 1)");
  }
}

}  // namespace

CESolution mann_solve(const Problem& p, const StackedPoint& v0, const SolverConfig& cfg) {
  cfg.validate();
  p.check(v0);
  IterationMonitor monitor(p, cfg);
  StackedPoint w = v0;
  const double keep = 1.0 - cfg.rho;
  for (std::size_t k = 0;; ++k) {
    const StackedPoint fw = p.apply_agents(w);
    monitor.count_evals();
    if (monitor.record(k, w, p.residual(w, fw))) break;
    const StackedPoint tw = p.reflected_map(w, fw);
    Vector& wf = w.flat();
    const Vector& tf = tw.flat();
    for (std::size_t i = 0; i < wf.size(); ++i) wf[i] = keep * wf[i] + cfg.rho * tf[i];
  }
  return monitor.finish(w);
}

CESolution preconditioned_mann_solve(const Problem& p, const StackedPoint& v0, const Matrix& h,
                                     const SolverConfig& cfg) {
  cfg.validate();
  p.check(v0);
  validate_preconditioner(h, p.stacked_dim());
  const Matrix keep = Matrix::identity(h.rows()) - h;
  std::optional<Cholesky> hinv;
  if (cfg.reference) hinv.emplace(h);

  IterationMonitor monitor(p, cfg);
  StackedPoint w = v0;
  for (std::size_t k = 0;; ++k) {
    const StackedPoint fw = p.apply_agents(w);
    monitor.count_evals();
    if (hinv) monitor.trace().hinv_error.push_back(norm(hinv->solve_lower(w.flat() - cfg.reference->flat())));
    if (monitor.record(k, w, p.residual(w, fw))) break;
    const StackedPoint tw = p.reflected_map(w, fw);
    w.flat() = keep * w.flat() + h * tw.flat();
  }
  return monitor.finish(w);
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& map, const Vector& x, double fd_eps) {
  const Vector base = map(x);
  Matrix j(base.size(), x.size());
  Vector xp = x;
  for (std::size_t c = 0; c < x.size(); ++c) {
    xp[c] = x[c] + fd_eps * (1.0 + std::abs(x[c]));
    const double step = xp[c] - x[c];
    Vector col = map(xp) - base;
    col *= 1.0 / step;
    j.set_column(c, col);
    xp[c] = x[c];
  }
  return j;
}

namespace {

constexpr std::size_t kMaxDenseNewtonDim = 2000;

// (2G - I) X for a stacked-row matrix X, without forming G.
Matrix reflect_rows(const Problem& p, const Matrix& x) {
  const std::size_t n = p.dim();
  const std::size_t cols = x.cols();
  Matrix avg(n, cols);
  for (std::size_t b = 0; b < p.num_agents(); ++b) {
    const double w = p.weights()[b];
    for (std::size_t k = 0; k < n; ++k) {
      auto src = x.row(b * n + k);
      auto dst = avg.row(k);
      for (std::size_t c = 0; c < cols; ++c) dst[c] += w * src[c];
    }
  }
  Matrix out(x.rows(), cols);
  for (std::size_t b = 0; b < p.num_agents(); ++b) {
    for (std::size_t k = 0; k < n; ++k) {
      auto src = x.row(b * n + k);
      auto a = avg.row(k);
      auto dst = out.row(b * n + k);
      for (std::size_t c = 0; c < cols; ++c) dst[c] = 2.0 * a[c] - src[c];
    }
  }
  return out;
}

}  // namespace

CESolution newton_solve(const Problem& p, const StackedPoint& v0, NewtonTarget target,
                        const SolverConfig& cfg) {
  cfg.validate();
  p.check(v0);
  const std::size_t n = p.dim();
  const std::size_t m = p.stacked_dim();
  require(m <= kMaxDenseNewtonDim, ErrorCode::InvalidArgument,
          "dense Newton is limited to nN <= " + std::to_string(kMaxDenseNewtonDim));

  std::vector<Matrix> blocks(p.num_agents());
  for (std::size_t i = 0; i < p.num_agents(); ++i)
    if (p.agents()[i].has_affine_part()) blocks[i] = p.agents()[i].affine_part().linear;

  IterationMonitor monitor(p, cfg);
  const Matrix g = averaging_matrix(p);
  StackedPoint v = v0;
  for (std::size_t k = 0;; ++k) {
    const StackedPoint fv = p.apply_agents(v);
    monitor.count_evals();
    const StackedPoint d = p.residual_vector(v, fv);
    if (monitor.record(k, v, norm(d.flat()))) break;

    if (k == 0 || !cfg.freeze_jacobian) {
      for (std::size_t i = 0; i < p.num_agents(); ++i) {
        const Agent& agent = p.agents()[i];
        if (agent.has_affine_part()) continue;
        blocks[i] = fd_jacobian([&agent](const Vector& x) { return agent(x); }, v.block(i), cfg.fd_eps);
        monitor.count_evals(n);
      }
    }
    Matrix jf(m, m);
    for (std::size_t i = 0; i < p.num_agents(); ++i)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) jf(i * n + r, i * n + c) = blocks[i](r, c);

    Matrix jac;
    Vector rhs;
    if (target == NewtonTarget::AgentsMinusAverage) {
      jac = jf - g;
      rhs = -d.flat();
    } else {
      Matrix reflected_agents = 2.0 * jf;
      for (std::size_t r = 0; r < m; ++r) reflected_agents(r, r) -= 1.0;
      jac = reflect_rows(p, reflected_agents);
      for (std::size_t r = 0; r < m; ++r) jac(r, r) -= 1.0;
      rhs = v.flat() - p.reflected_map(v, fv).flat();
    }

    Vector dx;
    try {
      dx = LuFactorization(jac).solve(rhs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
      throw Error(ErrorCode::SingularJacobian, "Newton step " + std::to_string(k) + ": " + e.what());
    }
    v.flat() += dx;
  }
  return monitor.finish(v);
}

CESolution jfnk_solve(const Problem& p, const StackedPoint& v0, const SolverConfig& cfg) {
  cfg.validate();
  p.check(v0);
  const std::size_t m = p.stacked_dim();
  const std::size_t dim = cfg.krylov_dim;
  require(dim <= m, ErrorCode::InvalidArgument, "krylov_dim exceeds the stacked dimension");

  auto residual_map = [&p](const StackedPoint& v) {
    return p.residual_vector(v, p.apply_agents(v)).flat();
  };

  IterationMonitor monitor(p, cfg);
  StackedPoint v = v0;
  Vector h = residual_map(v);
  monitor.count_evals();
  for (std::size_t k = 0;; ++k) {
    const double beta = norm(h);
    if (monitor.record(k, v, beta)) break;

    std::vector<Vector> basis;
    basis.reserve(dim + 1);
    basis.push_back((-1.0 / beta) * h);
    Matrix hess(dim + 1, dim);
    std::size_t used = dim;
    const double scale = cfg.fd_eps * (1.0 + norm(v.flat()));
    for (std::size_t c = 0; c < dim; ++c) {
      const double eps = scale / norm(basis[c]);
      StackedPoint probe = v;
      axpy(eps, basis[c], probe.flat());
      Vector w = residual_map(probe) - h;
      w *= 1.0 / eps;
      monitor.count_evals();
      // Modified Gram-Schmidt, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= c; ++i) {
          const double hij = dot(basis[i], w);
          axpy(-hij, basis[i], w);
          hess(i, c) += hij;
        }
      }
      const double wn = norm(w);
      hess(c + 1, c) = wn;
      if (wn < 1e-14) {
        used = c + 1;  // invariant subspace reached; solve over what we have
        break;
      }
      w *= 1.0 / wn;
      basis.push_back(std::move(w));
    }

    Matrix small(used + 1, used);
    for (std::size_t r = 0; r <= used; ++r)
      for (std::size_t c = 0; c < used; ++c) small(r, c) = hess(r, c);
    Vector rhs(used + 1);
    rhs[0] = beta;
    Vector y;
    try {
      y = qr_least_squares(small, rhs);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
      throw Error(ErrorCode::SingularJacobian, "JFNK step " + std::to_string(k) + ": " + e.what());
    }
    for (std::size_t i = 0; i < used; ++i) axpy(y[i], basis[i], v.flat());

    h = residual_map(v);
    monitor.count_evals();
  }
  return monitor.finish(v);
}

}  // namespace ce
