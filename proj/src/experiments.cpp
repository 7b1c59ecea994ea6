#include "ce/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ce/error.hpp"
#include "ce/rng.hpp"

namespace ce {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::IoError, "cannot create " + dir.string());
}

ExperimentSummary summarize(const std::string& experiment, std::uint64_t seed, const std::string& solver,
                            const CESolution& s, double seconds) {
  ExperimentSummary row;
  row.experiment = experiment;
  row.seed = seed;
  row.solver = solver;
  row.converged = s.converged;
  row.status = to_string(s.status);
  row.final_residual = s.residual;
  row.iterations = s.iterations;
  row.map_evals = s.trace.map_evals.empty() ? 0 : s.trace.map_evals.back();
  if (!s.trace.rmse_error.empty() && !std::isnan(s.trace.rmse_error.back())) row.final_rmse = s.trace.rmse_error.back();
  row.wall_time_s = seconds;
  return row;
}

ExperimentSummary failed_run(const std::string& experiment, std::uint64_t seed, const std::string& solver,
                             const Error& e) {
  ExperimentSummary row;
  row.experiment = experiment;
  row.seed = seed;
  row.solver = solver;
  row.status = std::string("error: ") + e.what();
  row.final_residual = std::numeric_limits<double>::quiet_NaN();
  return row;
}

template <typename Run>
std::pair<CESolution, double> timed(Run&& run) {
  const auto start = std::chrono::steady_clock::now();
  CESolution s = run();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {std::move(s), elapsed.count()};
}

void write_trace(const fs::path& dir, const std::string& label, const RunTrace& trace) {
  auto out = open_output(dir / ("trace_" + label + ".csv"));
  write_csv(out, trace);
}

void write_trajectory(const fs::path& dir, const std::string& label, const RunTrace& trace) {
  auto out = open_output(dir / ("trajectory_" + label + ".csv"));
  out << "iter,v11,v12,v21,v22\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    const Vector& v = trace.iterates[k].flat();
    out << trace.iteration[k];
    for (double x : v) out << ',' << x;
    out << '\n';
  }
}

void write_summary_file(const fs::path& dir, const std::vector<ExperimentSummary>& rows) {
  auto out = open_output(dir / "summary.json");
  write_summary_json(out, rows);
}

}  // namespace

void write_summary_json(std::ostream& out, const std::vector<ExperimentSummary>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["experiment"] = r.experiment;
    j["seed"] = r.seed;
    j["solver"] = r.solver;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["final_residual"] = r.final_residual;
    j["iterations"] = r.iterations;
    j["map_evals"] = r.map_evals;
    j["final_rmse"] = r.final_rmse ? nlohmann::ordered_json(*r.final_rmse) : nlohmann::ordered_json(nullptr);
    j["psnr_db"] = r.psnr ? nlohmann::ordered_json(*r.psnr) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

Problem make_toy_problem() {
  const Matrix a{{0.3, 0.6}, {0.4, 0.5}};
  const Vector y{1.0, 1.0};
  return Problem({quadratic_prox_agent(a, y, 1.0), toy_expanding_agent()});
}

ToyReport run_toy2d(const fs::path& out_dir, const ToyOptions& options) {
  prepare_dir(out_dir);
  const Problem p = make_toy_problem();
  const StackedPoint v0 = StackedPoint::replicate(options.start, 2);
  SolverConfig cfg = options.config;
  cfg.record_iterates = true;

  ToyReport report;
  struct Run {
    std::string label;
    std::function<CESolution()> solve;
  };
  const std::vector<Run> runs = {
      {"newton_fg",
       [&] {
         SolverConfig c = cfg;
         c.freeze_jacobian = true;
         return newton_solve(p, v0, NewtonTarget::AgentsMinusAverage, c);
       }},
      {"newton_mann",
       [&] {
         SolverConfig c = cfg;
         c.freeze_jacobian = true;
         return newton_solve(p, v0, NewtonTarget::FixedPointMap, c);
       }},
      {"admm",
       [&] {
         SolverConfig c = cfg;
         c.rho = 0.5;
         return mann_solve(p, v0, c);
       }},
  };
  for (const Run& run : runs) {
    try {
      auto [solution, seconds] = timed(run.solve);
      write_trace(out_dir, run.label, solution.trace);
      write_trajectory(out_dir, run.label, solution.trace);
      report.summaries.push_back(summarize("toy2d", 0, run.label, solution, seconds));
      report.solutions.emplace(run.label, std::move(solution));
    } catch (const Error& e) {
      report.summaries.push_back(failed_run("toy2d", 0, run.label, e));
    }
  }
  write_summary_file(out_dir, report.summaries);
  return report;
}

StochasticInstance make_stochastic_instance(double r, std::uint64_t seed, std::size_t n) {
  require(r > 0.0, ErrorCode::InvalidArgument, "r must be positive");
  Rng rng(seed);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.next_uniform();
  Vector y(n);
  for (double& yi : y) yi = rng.next_uniform();
  Matrix w = row_stochastic_matrix(n, rng);
  Problem p({quadratic_prox_agent(a, y, 1.0), blended_agent(w, r)});
  return StochasticInstance{std::move(a), std::move(y), std::move(w), r, std::move(p)};
}

StochasticReport run_stochastic(const fs::path& out_dir, const StochasticOptions& options) {
  for (const std::string& s : options.solvers)
    require(s == "admm" || s == "mann08" || s == "jfnk", ErrorCode::InvalidArgument, "unknown solver '" + s + "'");
  prepare_dir(out_dir);
  const StochasticInstance inst = make_stochastic_instance(options.r, options.seed);
  const Problem& p = inst.problem;

  StochasticReport report;
  try {
    report.reference = affine_ce_oracle(p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSystem) throw;
    std::cerr << "warning: " << e.what() << "; traces carry no error column\n";
  }
  report.spectrum = jacobian_spectrum(p, p.zeros());
  {
    auto out = open_output(out_dir / "spectrum.json");
    write_json(out, report.spectrum);
  }
  report.krylov_dim = options.krylov_dim.value_or(report.spectrum.max_real < 1.0 ? 10 : 75);

  SolverConfig cfg = options.config;
  cfg.reference = report.reference;
  const StackedPoint v0 = p.zeros();
  const std::string experiment = "stochastic_r" + [&] {
    std::ostringstream s;
    s << options.r;
    return s.str();
  }();

  // Fixed order so that summaries do not depend on set iteration details.
  for (const std::string label : {"admm", "mann08", "jfnk"}) {
    if (!options.solvers.contains(label)) continue;
    try {
      auto [solution, seconds] = timed([&] {
        SolverConfig c = cfg;
        if (std::string(label) == "jfnk") {
          c.krylov_dim = report.krylov_dim;
          c.max_iter = options.jfnk_max_outer;
          return jfnk_solve(p, v0, c);
        }
        c.rho = std::string(label) == "admm" ? 0.5 : 0.8;
        return mann_solve(p, v0, c);
      });
      write_trace(out_dir, label, solution.trace);
      report.summaries.push_back(summarize(experiment, options.seed, label, solution, seconds));
      report.solutions.emplace(label, std::move(solution));
    } catch (const Error& e) {
      report.summaries.push_back(failed_run(experiment, options.seed, label, e));
    }
  }
  write_summary_file(out_dir, report.summaries);
  return report;
}

Vector add_gaussian_noise(const Vector& x, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Vector y = x;
  for (std::size_t i = 0; i < y.size(); i += 2) {
    const auto [z0, z1] = rng.next_normal_pair();
    y[i] += sigma * z0;
    if (i + 1 < y.size()) y[i + 1] += sigma * z1;
  }
  return y;
}

namespace {

constexpr std::size_t kMaxCheckedPixels = 4096;

// Symmetry on seeded pairs plus a power-iteration norm bound: a symmetric map
// with operator norm <= 1 is nonexpansive.
bool check_nonexpansive(const Agent& agent, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n = agent.dim();
  auto random_vector = [&] {
    Vector v(n);
    for (double& x : v) x = rng.next_uniform() - 0.5;
    return v;
  };
  for (int trial = 0; trial < 3; ++trial) {
    const Vector a = random_vector();
    const Vector b = random_vector();
    const double lhs = dot(agent(a), b);
    const double rhs = dot(a, agent(b));
    if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(lhs))) return false;
  }
  Vector x = random_vector();
  double estimate = 0.0;
  for (int it = 0; it < 200; ++it) {
    x *= 1.0 / norm(x);
    x = agent(x);
    estimate = norm(x);
  }
  return estimate <= 1.0 + 1e-9;
}

std::string strength_label(double sigma) {
  std::ostringstream s;
  s << "denoiser_" << std::lround(sigma * 255.0);
  return s.str();
}

}  // namespace

DenoiseReport run_denoise(const fs::path& out_dir, const DenoiseOptions& options) {
  const NoiseParams& np = options.noise;
  np.validate();
  prepare_dir(out_dir);

  DenoiseReport report;
  report.clean = options.source == "phantom" ? phantom(options.phantom_size, options.phantom_size)
                                             : read_pgm(options.source);
  const std::size_t width = report.clean.width;
  const std::size_t height = report.clean.height;
  const Vector y = add_gaussian_noise(report.clean.as_vector(), np.sigma_eta, options.seed);
  report.noisy = Image(width, height, y);

  std::vector<Agent> agents;
  for (double s : np.sigma_list) agents.push_back(gaussian_denoiser_agent(width, height, s, options.kernel_std_per_strength));
  agents.push_back(data_fidelity_agent(y, np.sigma_eta, np.sigma_prox));
  report.weights = denoiser_weights(np);
  const std::size_t k = np.sigma_list.size();

  report.nonexpansive = true;
  if (width * height <= kMaxCheckedPixels) {
    for (std::size_t i = 0; i < k; ++i) report.nonexpansive &= check_nonexpansive(agents[i], options.seed + i);
    if (!report.nonexpansive) std::cerr << "warning: a denoiser failed the nonexpansiveness check\n";
  }

  double denoiser_total = 0.0;
  for (std::size_t i = 0; i < k; ++i) denoiser_total += report.weights[i];
  report.baseline_weights.resize(k);
  double check_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    report.baseline_weights[i] = report.weights[i] / denoiser_total;
    check_sum += report.baseline_weights[i];
  }
  require(std::abs(check_sum - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "baseline weights do not sum to 1");

  Vector baseline(y.size());
  for (std::size_t i = 0; i < k; ++i) {
    const Vector xi = agents[i](y);
    axpy(report.baseline_weights[i], xi, baseline);
    report.denoised.emplace_back(width, height, xi);
  }
  report.baseline = Image(width, height, baseline);

  const std::vector<Agent> agent_list = agents;
  const Problem p(std::move(agents), report.weights);
  SolverConfig cfg = options.config;
  cfg.rho = 0.5;
  auto [solution, seconds] = timed([&] { return mann_solve(p, StackedPoint::replicate(y, p.num_agents()), cfg); });
  report.ce = Image(width, height, solution.x_star);
  report.verified = solution.converged && is_equilibrium(p, solution.x_star, solution.u_star, 1e-5);

  const std::string experiment = "denoise";
  auto psnr_row = [&](const std::string& label, const Image& img) {
    ExperimentSummary row;
    row.experiment = experiment;
    row.seed = options.seed;
    row.solver = label;
    row.converged = true;
    row.status = "direct";
    row.psnr = psnr(img, report.clean);
    return row;
  };
  report.summaries.push_back(psnr_row("noisy", report.noisy));
  for (std::size_t i = 0; i < k; ++i) report.summaries.push_back(psnr_row(strength_label(np.sigma_list[i]), report.denoised[i]));
  report.summaries.push_back(psnr_row("baseline", report.baseline));
  ExperimentSummary ce_row = summarize(experiment, options.seed, "ce_admm", solution, seconds);
  ce_row.psnr = psnr(report.ce, report.clean);
  report.summaries.push_back(ce_row);

  write_pgm(out_dir / "clean.pgm", report.clean);
  write_pgm(out_dir / "noisy.pgm", report.noisy);
  for (std::size_t i = 0; i < k; ++i) write_pgm(out_dir / (strength_label(np.sigma_list[i]) + ".pgm"), report.denoised[i]);
  write_pgm(out_dir / "baseline.pgm", report.baseline);
  write_pgm(out_dir / "ce.pgm", report.ce);
  write_trace(out_dir, "admm", solution.trace);
  write_summary_file(out_dir, report.summaries);
  report.solution = std::move(solution);
  return report;
}

}  // namespace ce
