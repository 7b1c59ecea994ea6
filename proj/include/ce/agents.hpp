#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "ce/linalg.hpp"
#include "ce/rng.hpp"

namespace ce {

// v -> linear * v + offset
struct AffineMap {
  Matrix linear;
  Vector offset;

  Vector operator()(const Vector& v) const { return linear * v + offset; }
};

// A map R^n -> R^n taking part in the equilibrium. Immutable after
// construction; copies share state and may be called from several threads.
class Agent {
 public:
  using Map = std::function<Vector(const Vector&)>;
  using AffineBuilder = std::function<AffineMap()>;

  Agent(std::string label, std::size_t dim, Map map);
  Agent(std::string label, std::size_t dim, Map map, AffineMap affine);
  // The affine part is materialized on first request.
  Agent(std::string label, std::size_t dim, Map map, AffineBuilder lazy_affine);

  const std::string& label() const noexcept { return label_; }
  std::size_t dim() const noexcept { return dim_; }

  Vector operator()(const Vector& v) const;

  bool has_affine_part() const noexcept;
  // Throws InvalidArgument for a nonlinear agent.
  const AffineMap& affine_part() const;

 private:
  struct AffineSlot;

  std::string label_;
  std::size_t dim_;
  Map map_;
  std::shared_ptr<AffineSlot> affine_;
};

// (I + s^2 A^T A)^{-1} (v + s^2 A^T y): prox of x -> ||Ax - y||^2 / 2.
Agent quadratic_prox_agent(const Matrix& a, const Vector& y, double sigma);

// Prox of x -> lambda ||x - c||^2 / 2: v -> (v + s^2 lambda c) / (1 + s^2 lambda).
Agent prox_quadratic_norm_agent(const Vector& c, double lambda, double sigma);

// 1.1 (v1 + 0.2, v2 - 0.2 sin(2 v2)) on R^2; expands by 1.1 in the first axis.
Agent toy_expanding_agent();

// Uniform entries, each diagonal entry replaced by its row maximum, then rows
// normalized to sum 1. Consumes n*n uniforms row-major.
Matrix row_stochastic_matrix(std::size_t n, Rng& rng);
Agent row_stochastic_agent(std::size_t n, Rng& rng);

// v -> r W v + (1 - r) v / 2
Agent blended_agent(const Matrix& w, double r);

// Gaussian kernel standard deviation, in pixels, per unit of denoising strength.
inline constexpr double kDefaultKernelStdPerStrength = 4.0;

// Separable Gaussian blur with std = kernel_std_per_strength * strength pixels,
// truncated at ceil(4 std) taps and with half-sample symmetric borders. The
// affine part (the convolution matrix) is available for images of at most
// 4096 pixels.
Agent gaussian_denoiser_agent(std::size_t width, std::size_t height, double strength,
                              double kernel_std_per_strength = kDefaultKernelStdPerStrength);

// Normalized 1-D taps of the blur above, index 0 is offset -radius.
Vector gaussian_taps(double kernel_std);

// Prox of the Gaussian likelihood: v -> (s^2 y + s_eta^2 v) / (s^2 + s_eta^2).
Agent data_fidelity_agent(const Vector& y, double sigma_eta, double sigma_prox);

// Dense n x n matrix of a linear map, one column per unit vector.
Matrix materialize(const Agent::Map& map, std::size_t n);

}  // namespace ce
