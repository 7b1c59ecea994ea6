#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ce/analysis.hpp"
#include "ce/equilibrium.hpp"
#include "ce/image.hpp"
#include "ce/solvers.hpp"

namespace ce {

// One row of summary.json. Wall time is kept out of the JSON so that repeated
// runs produce identical files.
struct ExperimentSummary {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string solver;
  bool converged = false;
  std::string status;
  double final_residual = 0.0;
  std::size_t iterations = 0;
  std::size_t map_evals = 0;
  std::optional<double> final_rmse;
  std::optional<double> psnr;
  double wall_time_s = 0.0;
};

void write_summary_json(std::ostream& out, const std::vector<ExperimentSummary>& rows);

// --- two-dimensional toy problem ---

struct ToyOptions {
  SolverConfig config;
  // Common starting block (v_1 = v_2 = start); zeros by default.
  Vector start = Vector(2);
};

Problem make_toy_problem();

struct ToyReport {
  std::vector<ExperimentSummary> summaries;
  // "newton_fg", "newton_mann", "admm"; absent when the solver threw.
  std::map<std::string, CESolution> solutions;
};

// Writes trace_<solver>.csv, trajectory_<solver>.csv and summary.json.
ToyReport run_toy2d(const std::filesystem::path& out_dir, const ToyOptions& options = {});

// --- stochastic-matrix family ---

inline constexpr std::uint64_t kDefaultStochasticSeed = 11;
inline constexpr std::size_t kStochasticDim = 100;

struct StochasticInstance {
  Matrix a;
  Vector y;
  Matrix w;
  double r;
  Problem problem;
};

// Draws A (row-major), y, then W from one generator.
StochasticInstance make_stochastic_instance(double r, std::uint64_t seed, std::size_t n = kStochasticDim);

struct StochasticOptions {
  double r = 1.02;
  std::uint64_t seed = kDefaultStochasticSeed;
  // Subset of {"admm", "mann08", "jfnk"}.
  std::set<std::string> solvers = {"admm", "mann08", "jfnk"};
  SolverConfig config;
  // Defaults to 10 when every eigenvalue of J_T has real part below 1, else 75.
  std::optional<std::size_t> krylov_dim;
  std::size_t jfnk_max_outer = 50;
};

struct StochasticReport {
  std::vector<ExperimentSummary> summaries;
  std::map<std::string, CESolution> solutions;
  SpectrumReport spectrum;
  std::optional<StackedPoint> reference;
  std::size_t krylov_dim = 0;
};

// Writes trace_<solver>.csv, spectrum.json and summary.json.
StochasticReport run_stochastic(const std::filesystem::path& out_dir, const StochasticOptions& options);

// --- multi-denoiser image experiment ---

struct DenoiseOptions {
  // "phantom" or a PGM path.
  std::string source = "phantom";
  std::size_t phantom_size = 64;
  NoiseParams noise{20.0 / 255.0, {10.0 / 255, 15.0 / 255, 25.0 / 255, 35.0 / 255, 50.0 / 255}, 5.0 / 255.0,
                    20.0 / 255.0};
  std::uint64_t seed = 1;
  double kernel_std_per_strength = kDefaultKernelStdPerStrength;
  SolverConfig config;
};

struct DenoiseReport {
  std::vector<ExperimentSummary> summaries;
  Image clean;
  Image noisy;
  std::vector<Image> denoised;  // each denoiser applied to the noisy image
  Image baseline;
  Image ce;
  Weights weights = Weights::uniform(1);
  std::vector<double> baseline_weights;
  CESolution solution;
  bool verified = false;      // equilibrium check at 1e-5 after convergence
  bool nonexpansive = false;  // startup check of every denoiser
};

DenoiseReport run_denoise(const std::filesystem::path& out_dir, const DenoiseOptions& options);

// y = x + sigma * z with z from Box-Muller pairs over the seeded stream.
Vector add_gaussian_noise(const Vector& x, double sigma, std::uint64_t seed);

}  // namespace ce
