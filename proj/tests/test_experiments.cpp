#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ce/agents.hpp"
#include "ce/error.hpp"
#include "ce/experiments.hpp"

using namespace ce;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ce_experiment_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DenoiseOptions small_denoise(std::size_t size, double sigma_eta, std::vector<double> sigma_list) {
  DenoiseOptions o;
  o.phantom_size = size;
  o.noise = NoiseParams{sigma_eta, std::move(sigma_list), 5.0 / 255.0, sigma_eta};
  o.config.tol = 1e-10;
  return o;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("toy experiment writes traces and trajectories") {
  const fs::path dir = scratch("toy");
  const ToyReport r = run_toy2d(dir);
  REQUIRE(r.summaries.size() == 3);
  for (const char* label : {"newton_fg", "newton_mann", "admm"}) {
    CHECK(fs::exists(dir / (std::string("trace_") + label + ".csv")));
    CHECK(fs::exists(dir / (std::string("trajectory_") + label + ".csv")));
  }
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  REQUIRE(summary.size() == 3);
  for (const auto& row : summary) {
    for (const char* key : {"experiment", "seed", "solver", "converged", "status", "final_residual", "iterations",
                            "map_evals", "final_rmse", "psnr_db"})
      CHECK(row.contains(key));
    CHECK_FALSE(row.contains("wall_time_s"));
  }
  // ADMM cannot settle on the expanding toy problem
  const CESolution& admm = r.solutions.at("admm");
  CHECK_FALSE(admm.converged);
  bool below = false;
  for (std::size_t k = 0; k < admm.trace.size() && k <= 500; ++k) below |= admm.trace.residual[k] <= 1e-6;
  CHECK_FALSE(below);
}

TEST_CASE("toy experiment from an alternative start") {
  ToyOptions o;
  o.start = Vector{0, 2};
  o.config.tol = 1e-10;
  const ToyReport r = run_toy2d(scratch("toy_start"), o);
  const CESolution& fg = r.solutions.at("newton_fg");
  const CESolution& mann = r.solutions.at("newton_mann");
  REQUIRE(fg.converged);
  REQUIRE(mann.converged);
  CHECK(norm_inf(fg.x_star - mann.x_star) <= 1e-8);
  CHECK(norm_inf(fg.u_star.block(0) + fg.u_star.block(1)) <= 1e-8);
}

TEST_CASE("stochastic instance draws are reproducible") {
  const StochasticInstance a = make_stochastic_instance(1.02, 3, 12);
  const StochasticInstance b = make_stochastic_instance(1.02, 3, 12);
  CHECK(a.a == b.a);
  CHECK(a.w == b.w);
  CHECK(a.y == b.y);
  // A is drawn first, row-major
  Rng rng(3);
  CHECK(a.a(0, 0) == rng.next_uniform());
  CHECK(a.a(0, 1) == rng.next_uniform());
  CHECK_THROWS_AS(make_stochastic_instance(0.0, 3, 12), Error);
}

TEST_CASE("stochastic experiment outputs") {
  const fs::path dir = scratch("stochastic");
  StochasticOptions o;
  o.solvers = {"jfnk"};
  const StochasticReport r = run_stochastic(dir, o);
  CHECK(r.krylov_dim == 10);
  CHECK(fs::exists(dir / "spectrum.json"));
  CHECK(fs::exists(dir / "trace_jfnk.csv"));
  CHECK_FALSE(fs::exists(dir / "trace_admm.csv"));
  REQUIRE(r.reference.has_value());
  CHECK(r.solutions.at("jfnk").converged);
  StochasticOptions bad;
  bad.solvers = {"gmres"};
  CHECK_THROWS_AS(run_stochastic(scratch("stochastic_bad"), bad), Error);
}

TEST_CASE("noise generation is seeded") {
  const Vector x(101, 0.5);
  CHECK(add_gaussian_noise(x, 0.1, 4) == add_gaussian_noise(x, 0.1, 4));
  CHECK_FALSE(add_gaussian_noise(x, 0.1, 4) == add_gaussian_noise(x, 0.1, 5));
}

TEST_CASE("single denoiser equilibrium equals the denoiser applied to the data") {
  const double se = 25.0 / 255.0;
  const DenoiseReport r = run_denoise(scratch("k1"), small_denoise(32, se, {se}));
  REQUIRE(r.solution.converged);
  const Agent f = gaussian_denoiser_agent(32, 32, se);
  const Vector direct = f(r.noisy.as_vector());
  CHECK(norm_inf(r.ce.as_vector() - direct) <= 1e-8);
  CHECK(r.weights[0] == 0.5);
  CHECK(r.weights[1] == 0.5);
}

TEST_CASE("tiny noise level keeps the data") {
  // The prox scale stays at a typical value while the noise level vanishes,
  // so the fidelity map collapses onto y.
  DenoiseOptions o = small_denoise(24, 1e-6, {10.0 / 255.0, 25.0 / 255.0});
  o.noise.h = 20.0 / 255.0;
  o.noise.sigma_prox = 20.0 / 255.0;
  const DenoiseReport r = run_denoise(scratch("tiny"), o);
  REQUIRE(r.solution.converged);
  CHECK(norm_inf(r.ce.as_vector() - r.noisy.as_vector()) <= 1e-3);
}

TEST_CASE("denoise outputs and invariants") {
  const fs::path dir = scratch("denoise");
  DenoiseOptions o = small_denoise(32, 20.0 / 255.0, {10.0 / 255, 15.0 / 255, 25.0 / 255, 35.0 / 255, 50.0 / 255});
  o.config.tol = 1e-6;
  const DenoiseReport r = run_denoise(dir, o);
  CHECK(r.nonexpansive);
  CHECK(r.solution.converged);
  CHECK(r.verified);
  double total = 0.0;
  for (double w : r.baseline_weights) total += w;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(r.weights[5] == 0.5);
  for (const char* name : {"clean.pgm", "noisy.pgm", "baseline.pgm", "ce.pgm", "denoiser_10.pgm", "denoiser_50.pgm",
                           "summary.json", "trace_admm.csv"})
    CHECK(fs::exists(dir / name));
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.back()["solver"] == "ce_admm");
  CHECK(summary.back()["psnr_db"].is_number());
}

TEST_CASE("denoise rejects a missing input image") {
  DenoiseOptions o = small_denoise(32, 0.1, {0.1});
  o.source = (fs::temp_directory_path() / "ce_no_such_image.pgm").string();
  CHECK_THROWS_AS(run_denoise(scratch("missing"), o), Error);
}

TEST_CASE("experiments are byte-reproducible") {
  auto files_of = [](const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
  };
  const fs::path ta = scratch("det_toy_a");
  const fs::path tb = scratch("det_toy_b");
  run_toy2d(ta);
  run_toy2d(tb);
  CHECK(files_of(ta) == files_of(tb));

  const DenoiseOptions o = small_denoise(24, 30.0 / 255.0, {15.0 / 255, 35.0 / 255});
  const fs::path da = scratch("det_den_a");
  const fs::path db = scratch("det_den_b");
  run_denoise(da, o);
  run_denoise(db, o);
  CHECK(files_of(da) == files_of(db));
}

}  // TEST_SUITE
