#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ce/agents.hpp"
#include "ce/linalg.hpp"

namespace ce {

// An element of R^{nN} viewed as N blocks of length n, stored contiguously.
class StackedPoint {
 public:
  StackedPoint() = default;
  StackedPoint(std::size_t num_blocks, std::size_t block_dim, double fill = 0.0);
  StackedPoint(Vector flat, std::size_t num_blocks);

  static StackedPoint from_blocks(const std::vector<Vector>& blocks);
  // N copies of x.
  static StackedPoint replicate(const Vector& x, std::size_t num_blocks);

  std::size_t num_blocks() const noexcept { return num_blocks_; }
  std::size_t block_dim() const noexcept { return block_dim_; }
  std::size_t size() const noexcept { return flat_.size(); }

  Vector block(std::size_t i) const;
  std::span<const double> block_view(std::size_t i) const;
  std::span<double> block_view(std::size_t i);
  void set_block(std::size_t i, const Vector& v);

  const Vector& flat() const noexcept { return flat_; }
  Vector& flat() noexcept { return flat_; }

  friend bool operator==(const StackedPoint&, const StackedPoint&) = default;

 private:
  std::size_t num_blocks_ = 0;
  std::size_t block_dim_ = 0;
  Vector flat_;
};

// One block per CSV row, 17 significant digits.
void write_csv(std::ostream& out, const StackedPoint& v);

// Positive weights summing to one.
class Weights {
 public:
  // Throws InvalidArgument unless every entry is positive and the sum is 1
  // within 1e-12.
  explicit Weights(std::vector<double> mu);

  static Weights uniform(std::size_t n);
  // Divides positive scores by their sum.
  static Weights normalized(const std::vector<double>& scores);

  std::size_t size() const noexcept { return mu_.size(); }
  double operator[](std::size_t i) const { return mu_[i]; }
  const std::vector<double>& values() const noexcept { return mu_; }

 private:
  std::vector<double> mu_;
};

// N agents of a common dimension with their weights. The stacked maps are
//   agents:   (v_1, ..., v_N) -> (F_1(v_1), ..., F_N(v_N))
//   average:  every block replaced by sum_i mu_i v_i
//   reflected fixed-point map: (2 average - I)(2 agents - I)
class Problem {
 public:
  Problem(std::vector<Agent> agents, Weights weights);
  // Uniform weights.
  explicit Problem(std::vector<Agent> agents);

  std::size_t num_agents() const noexcept { return agents_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t stacked_dim() const noexcept { return dim_ * agents_.size(); }
  const std::vector<Agent>& agents() const noexcept { return agents_; }
  const Weights& weights() const noexcept { return weights_; }

  StackedPoint zeros() const { return StackedPoint(num_agents(), dim()); }

  StackedPoint apply_agents(const StackedPoint& v) const;
  Vector weighted_average(const StackedPoint& v) const;
  StackedPoint average(const StackedPoint& v) const;
  // T(v), from an already evaluated agents(v).
  StackedPoint reflected_map(const StackedPoint& v, const StackedPoint& agents_v) const;
  StackedPoint reflected_map(const StackedPoint& v) const;
  // ||agents(v) - average(v)||, over all nN entries.
  double residual(const StackedPoint& v) const;
  double residual(const StackedPoint& v, const StackedPoint& agents_v) const;
  // agents(v) - average(v)
  StackedPoint residual_vector(const StackedPoint& v, const StackedPoint& agents_v) const;

  void check(const StackedPoint& v) const;

 private:
  std::vector<Agent> agents_;
  Weights weights_;
  std::size_t dim_ = 0;
};

// Per-iteration history. Row 0 describes the starting point.
struct RunTrace {
  std::vector<std::size_t> iteration;
  std::vector<double> residual;
  // ||v - v_ref|| / sqrt(nN); NaN without a reference.
  std::vector<double> rmse_error;
  // Cumulative stacked agent sweeps.
  std::vector<std::size_t> map_evals;
  // ||v - v_ref||_{H^-1}, preconditioned Mann with a reference only.
  std::vector<double> hinv_error;
  // Iterates, when requested.
  std::vector<StackedPoint> iterates;

  std::size_t size() const noexcept { return residual.size(); }
  void add(std::size_t iter, double res, double rmse, std::size_t evals);
};

// Header `iter,residual,rmse_error,map_evals`.
void write_csv(std::ostream& out, const RunTrace& trace);

enum class SolverStatus { Converged, MaxIterations, Diverged };

struct CESolution {
  Vector x_star;
  StackedPoint u_star;
  StackedPoint v_star;
  double residual = 0.0;
  bool converged = false;
  SolverStatus status = SolverStatus::MaxIterations;
  // ||sum_i mu_i u_i||
  double tension_balance = 0.0;
  std::size_t iterations = 0;
  RunTrace trace;
};

// x = weighted average of v, u_i = v_i - x.
CESolution extract_solution(const Problem& p, const StackedPoint& v, RunTrace trace = {});

// max_i ||F_i(x + u_i) - x|| <= tol and ||sum_i mu_i u_i|| <= tol.
bool is_equilibrium(const Problem& p, const Vector& x, const StackedPoint& u, double tol);

struct NoiseParams {
  double sigma_eta;                 // actual noise std on the [0,1] scale
  std::vector<double> sigma_list;   // denoiser strengths, strictly increasing
  double h;                         // weight cutoff
  double sigma_prox;                // fidelity prox parameter

  void validate() const;
};

// K denoiser weights followed by the fidelity weight, which is always 1/2.
Weights denoiser_weights(const NoiseParams& np);

}  // namespace ce
