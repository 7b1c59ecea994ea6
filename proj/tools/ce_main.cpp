// ce: command-line driver for the consensus-equilibrium experiments.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ce/error.hpp"
#include "ce/experiments.hpp"

namespace {

// Accepts plain numbers and fractions such as 20/255.
double parse_number(const std::string& text) {
  const auto slash = text.find('/');
  std::size_t used = 0;
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } else {
      const std::string num = text.substr(0, slash);
      const std::string den = text.substr(slash + 1);
      std::size_t used_den = 0;
      const double a = std::stod(num, &used);
      const double b = std::stod(den, &used_den);
      if (used == num.size() && used_den == den.size() && b != 0.0) return a / b;
    }
  } catch (const std::logic_error&) {
  }
  throw ce::Error(ce::ErrorCode::InvalidArgument, "not a number: '" + text + "'");
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void print_summaries(const std::vector<ce::ExperimentSummary>& rows) {
  for (const auto& r : rows) {
    std::cout << r.solver << ": " << r.status;
    if (r.iterations > 0 || r.map_evals > 0)
      std::cout << ", residual " << r.final_residual << ", iterations " << r.iterations << ", map evals "
                << r.map_evals;
    if (r.final_rmse) std::cout << ", rmse " << *r.final_rmse;
    if (r.psnr) std::cout << ", psnr " << *r.psnr << " dB";
    if (r.wall_time_s > 0.0) std::cout << ", " << r.wall_time_s << " s";
    std::cout << '\n';
  }
}

bool all_completed(const std::vector<ce::ExperimentSummary>& rows) {
  for (const auto& r : rows)
    if (r.status.rfind("error", 0) == 0) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus equilibrium solvers and experiments"};
  app.require_subcommand(1);

  double tol = 1e-8;
  std::size_t max_iter = 10000;
  app.add_option("--tol", tol, "residual tolerance")->capture_default_str();
  app.add_option("--max-iter", max_iter, "iteration limit")->capture_default_str();

  std::string out_dir;

  auto* toy = app.add_subcommand("toy2d", "two-dimensional example with one expanding agent");
  toy->add_option("--out", out_dir, "output directory")->required();
  std::string start_text = "0,0";
  toy->add_option("--start", start_text, "common starting block a,b")->capture_default_str();

  auto* stoch = app.add_subcommand("stochastic", "row-stochastic family, n = 100");
  stoch->add_option("--out", out_dir, "output directory")->required();
  std::string r_text = "1.02";
  std::uint64_t stoch_seed = ce::kDefaultStochasticSeed;
  std::string solvers_text = "admm,mann08,jfnk";
  std::size_t krylov_dim = 0;
  std::size_t jfnk_max_outer = 50;
  stoch->add_option("--r", r_text, "blend parameter")->capture_default_str();
  stoch->add_option("--seed", stoch_seed, "instance seed")->capture_default_str();
  stoch->add_option("--solvers", solvers_text, "comma-separated subset of admm,mann08,jfnk")->capture_default_str();
  stoch->add_option("--krylov-dim", krylov_dim, "JFNK basis size (default: from the spectrum)");
  stoch->add_option("--jfnk-max-outer", jfnk_max_outer, "JFNK outer steps")->capture_default_str();

  auto* den = app.add_subcommand("denoise", "multi-denoiser image experiment");
  den->set_help_flag("--help", "print this help and exit");  // -h would clash with --h
  den->add_option("--out", out_dir, "output directory")->required();
  std::string input = "phantom";
  std::string sigma_eta_text = "20/255";
  std::string h_text = "5/255";
  std::string sigma_list_text;
  std::uint64_t den_seed = 1;
  std::size_t size = 64;
  den->add_option("--input", input, "phantom or a PGM path")->capture_default_str();
  den->add_option("--sigma-eta", sigma_eta_text, "noise standard deviation")->capture_default_str();
  den->add_option("--h", h_text, "weight cutoff")->capture_default_str();
  den->add_option("--sigma-list", sigma_list_text, "comma-separated denoiser strengths");
  den->add_option("--seed", den_seed, "noise seed")->capture_default_str();
  den->add_option("--size", size, "phantom side length")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  try {
    ce::SolverConfig config;
    config.tol = tol;
    config.max_iter = max_iter;
    config.validate();

    if (*toy) {
      ce::ToyOptions options;
      options.config = config;
      const auto parts = split(start_text, ',');
      if (parts.size() != 2) throw ce::Error(ce::ErrorCode::InvalidArgument, "--start expects a,b");
      options.start = ce::Vector{parse_number(parts[0]), parse_number(parts[1])};
      const auto report = ce::run_toy2d(out_dir, options);
      print_summaries(report.summaries);
      ok = all_completed(report.summaries);
    } else if (*stoch) {
      ce::StochasticOptions options;
      options.r = parse_number(r_text);
      options.seed = stoch_seed;
      const auto names = split(solvers_text, ',');
      options.solvers = std::set<std::string>(names.begin(), names.end());
      options.config = config;
      if (krylov_dim > 0) options.krylov_dim = krylov_dim;
      options.jfnk_max_outer = jfnk_max_outer;
      const auto report = ce::run_stochastic(out_dir, options);
      std::cout << "max Re(lambda) = " << report.spectrum.max_real << ", Lipschitz = " << report.spectrum.lipschitz
                << ", rho* = " << report.spectrum.rho_star << " (radius " << report.spectrum.rho_star_radius
                << "), krylov dim " << report.krylov_dim << '\n';
      print_summaries(report.summaries);
      ok = all_completed(report.summaries);
    } else if (*den) {
      ce::DenoiseOptions options;
      options.source = input;
      options.phantom_size = size;
      options.noise.sigma_eta = parse_number(sigma_eta_text);
      options.noise.sigma_prox = options.noise.sigma_eta;
      options.noise.h = parse_number(h_text);
      if (!sigma_list_text.empty()) {
        options.noise.sigma_list.clear();
        for (const auto& s : split(sigma_list_text, ',')) options.noise.sigma_list.push_back(parse_number(s));
      }
      options.seed = den_seed;
      options.config = config;
      const auto report = ce::run_denoise(out_dir, options);
      print_summaries(report.summaries);
      if (!report.nonexpansive) std::cout << "warning: nonexpansiveness check failed\n";
      std::cout << "equilibrium verified: " << (report.verified ? "yes" : "no") << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    ok = false;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  std::cout << "wall time " << elapsed.count() << " s\n";
  return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
