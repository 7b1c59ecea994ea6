#include "ce/equilibrium.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "ce/error.hpp"

namespace ce {

StackedPoint::StackedPoint(std::size_t num_blocks, std::size_t block_dim, double fill)
    : num_blocks_(num_blocks), block_dim_(block_dim), flat_(num_blocks * block_dim, fill) {
  require(num_blocks >= 1, ErrorCode::InvalidArgument, "stacked point needs at least one block");
}

StackedPoint::StackedPoint(Vector flat, std::size_t num_blocks)
    : num_blocks_(num_blocks), flat_(std::move(flat)) {
  require(num_blocks >= 1 && flat_.size() % num_blocks == 0, ErrorCode::DimensionMismatch,
          "flat vector of length " + std::to_string(flat_.size()) + " is not " +
              std::to_string(num_blocks) + " equal blocks");
  block_dim_ = flat_.size() / num_blocks;
}

StackedPoint StackedPoint::from_blocks(const std::vector<Vector>& blocks) {
  require(!blocks.empty(), ErrorCode::InvalidArgument, "stacked point needs at least one block");
  StackedPoint v(blocks.size(), blocks.front().size());
  for (std::size_t i = 0; i < blocks.size(); ++i) v.set_block(i, blocks[i]);
  return v;
}

StackedPoint StackedPoint::replicate(const Vector& x, std::size_t num_blocks) {
  StackedPoint v(num_blocks, x.size());
  for (std::size_t i = 0; i < num_blocks; ++i) v.set_block(i, x);
  return v;
}

Vector StackedPoint::block(std::size_t i) const {
  auto view = block_view(i);
  return Vector(std::vector<double>(view.begin(), view.end()));
}

std::span<const double> StackedPoint::block_view(std::size_t i) const {
  return flat_.span().subspan(i * block_dim_, block_dim_);
}

std::span<double> StackedPoint::block_view(std::size_t i) {
  return flat_.span().subspan(i * block_dim_, block_dim_);
}

void StackedPoint::set_block(std::size_t i, const Vector& v) {
  require(v.size() == block_dim_, ErrorCode::DimensionMismatch, "block length");
  std::copy(v.begin(), v.end(), block_view(i).begin());
}

void write_csv(std::ostream& out, const StackedPoint& v) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < v.num_blocks(); ++i) {
    auto b = v.block_view(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (j) out << ',';
      out << b[j];
    }
    out << '\n';
  }
}

Weights::Weights(std::vector<double> mu) : mu_(std::move(mu)) {
  require(!mu_.empty(), ErrorCode::InvalidArgument, "weights must be non-empty");
  double sum = 0.0;
  for (double m : mu_) {
    require(m > 0.0 && std::isfinite(m), ErrorCode::InvalidArgument, "weights must be positive");
    sum += m;
  }
  require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "weights must sum to 1");
}

Weights Weights::uniform(std::size_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "weights must be non-empty");
  return Weights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Weights Weights::normalized(const std::vector<double>& scores) {
  const double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
  require(sum > 0.0, ErrorCode::InvalidArgument, "scores must have a positive sum");
  std::vector<double> mu(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) mu[i] = scores[i] / sum;
  return Weights(std::move(mu));
}

Problem::Problem(std::vector<Agent> agents, Weights weights)
    : agents_(std::move(agents)), weights_(std::move(weights)) {
  require(!agents_.empty(), ErrorCode::InvalidArgument, "problem needs at least one agent");
  require(weights_.size() == agents_.size(), ErrorCode::DimensionMismatch,
          "weight count differs from agent count");
  dim_ = agents_.front().dim();
  for (const Agent& a : agents_)
    require(a.dim() == dim_, ErrorCode::DimensionMismatch, "agent " + a.label() + " has a different dimension");
}

Problem::Problem(std::vector<Agent> agents) : Problem(agents, Weights::uniform(agents.size())) {}

void Problem::check(const StackedPoint& v) const {
  require(v.num_blocks() == num_agents() && v.block_dim() == dim_, ErrorCode::DimensionMismatch,
          "stacked point shape " + std::to_string(v.num_blocks()) + "x" + std::to_string(v.block_dim()) +
              " does not match problem " + std::to_string(num_agents()) + "x" + std::to_string(dim_));
}

StackedPoint Problem::apply_agents(const StackedPoint& v) const {
  check(v);
  StackedPoint out(num_agents(), dim_);
  for (std::size_t i = 0; i < agents_.size(); ++i) out.set_block(i, agents_[i](v.block(i)));
  return out;
}

Vector Problem::weighted_average(const StackedPoint& v) const {
  check(v);
  Vector avg(dim_);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const double w = weights_[i];
    auto b = v.block_view(i);
    for (std::size_t k = 0; k < dim_; ++k) avg[k] += w * b[k];
  }
  return avg;
}

StackedPoint Problem::average(const StackedPoint& v) const {
  return StackedPoint::replicate(weighted_average(v), num_agents());
}

StackedPoint Problem::reflected_map(const StackedPoint& v, const StackedPoint& agents_v) const {
  check(agents_v);
  // r = (2F - I)v, then (2G - I)r = 2 avg(r) - r
  StackedPoint r = agents_v;
  Vector& rf = r.flat();
  const Vector& vf = v.flat();
  for (std::size_t k = 0; k < rf.size(); ++k) rf[k] = 2.0 * rf[k] - vf[k];
  const Vector avg = weighted_average(r);
  for (std::size_t i = 0; i < num_agents(); ++i) {
    auto b = r.block_view(i);
    for (std::size_t k = 0; k < dim_; ++k) b[k] = 2.0 * avg[k] - b[k];
  }
  return r;
}

StackedPoint Problem::reflected_map(const StackedPoint& v) const {
  return reflected_map(v, apply_agents(v));
}

StackedPoint Problem::residual_vector(const StackedPoint& v, const StackedPoint& agents_v) const {
  const Vector avg = weighted_average(v);
  StackedPoint d = agents_v;
  for (std::size_t i = 0; i < num_agents(); ++i) {
    auto b = d.block_view(i);
    for (std::size_t k = 0; k < dim_; ++k) b[k] -= avg[k];
  }
  return d;
}

double Problem::residual(const StackedPoint& v, const StackedPoint& agents_v) const {
  return norm(residual_vector(v, agents_v).flat());
}

double Problem::residual(const StackedPoint& v) const { return residual(v, apply_agents(v)); }

void RunTrace::add(std::size_t iter, double res, double rmse, std::size_t evals) {
  iteration.push_back(iter);
  residual.push_back(res);
  rmse_error.push_back(rmse);
  map_evals.push_back(evals);
}

void write_csv(std::ostream& out, const RunTrace& trace) {
  out << "iter,residual,rmse_error,map_evals\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << trace.iteration[k] << ',' << trace.residual[k] << ',';
    if (std::isnan(trace.rmse_error[k]))
      out << "nan";
    else
      out << trace.rmse_error[k];
    out << ',' << trace.map_evals[k] << '\n';
  }
}

CESolution extract_solution(const Problem& p, const StackedPoint& v, RunTrace trace) {
  p.check(v);
  CESolution s;
  s.x_star = p.weighted_average(v);
  s.u_star = v;
  for (std::size_t i = 0; i < p.num_agents(); ++i) {
    auto b = s.u_star.block_view(i);
    for (std::size_t k = 0; k < p.dim(); ++k) b[k] -= s.x_star[k];
  }
  s.v_star = StackedPoint::replicate(s.x_star, p.num_agents());
  s.v_star.flat() += s.u_star.flat();
  s.tension_balance = norm(p.weighted_average(s.u_star));
  s.residual = p.residual(v);
  s.trace = std::move(trace);
  return s;
}

bool is_equilibrium(const Problem& p, const Vector& x, const StackedPoint& u, double tol) {
  p.check(u);
  require(x.size() == p.dim(), ErrorCode::DimensionMismatch, "equilibrium point dimension");
  for (std::size_t i = 0; i < p.num_agents(); ++i) {
    const Vector fi = p.agents()[i](x + u.block(i));
    if (!(norm(fi - x) <= tol)) return false;
  }
  return norm(p.weighted_average(u)) <= tol;
}

void NoiseParams::validate() const {
  require(sigma_eta > 0.0 && h > 0.0 && sigma_prox > 0.0, ErrorCode::InvalidArgument,
          "noise parameters must be positive");
  require(!sigma_list.empty(), ErrorCode::InvalidArgument, "at least one denoiser strength is needed");
  for (std::size_t i = 0; i < sigma_list.size(); ++i) {
    require(sigma_list[i] > 0.0, ErrorCode::InvalidArgument, "denoiser strengths must be positive");
    require(i == 0 || sigma_list[i] > sigma_list[i - 1], ErrorCode::InvalidArgument,
            "denoiser strengths must be strictly increasing");
  }
}

Weights denoiser_weights(const NoiseParams& np) {
  np.validate();
  const std::size_t k = np.sigma_list.size();
  std::vector<double> p(k + 1);
  double denoiser_total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = np.sigma_eta - np.sigma_list[i];
    p[i] = std::exp(-d * d / (2.0 * np.h * np.h));
    denoiser_total += p[i];
  }
  require(denoiser_total > 0.0, ErrorCode::InvalidArgument, "all denoiser weights underflow");
  // The fidelity score equals the denoiser total, so it always receives 1/2.
  std::vector<double> mu(k + 1);
  for (std::size_t i = 0; i < k; ++i) mu[i] = 0.5 * p[i] / denoiser_total;
  mu[k] = 0.5;
  return Weights(std::move(mu));
}

}  // namespace ce
