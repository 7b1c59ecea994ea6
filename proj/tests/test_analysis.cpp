#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ce/agents.hpp"
#include "ce/analysis.hpp"
#include "ce/error.hpp"
#include "ce/experiments.hpp"
#include "ce/solvers.hpp"
#include "support.hpp"

using namespace ce;
using ce::testing::multiset_distance;
using ce::testing::random_matrix;
using ce::testing::random_quadratic;
using ce::testing::random_vector;

namespace {

Agent identity_agent(std::size_t n) {
  return Agent("identity", n, [](const Vector& v) { return v; }, AffineMap{Matrix::identity(n), Vector(n)});
}

// Small affine problem mixing prox agents and a blended stochastic agent.
Problem affine_problem(Rng& rng, std::size_t n, double r) {
  return Problem({quadratic_prox_agent(random_matrix(rng, n, n, 0.0, 1.0), random_vector(rng, n, 0.0, 1.0), 1.0),
                  blended_agent(row_stochastic_matrix(n, rng), r)});
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("quadratic objective") {
  const QuadraticObjective f = QuadraticObjective::least_squares(Matrix{{1, 2}, {0, 1}, {1, 0}}, Vector{1, 0, 2});
  const Vector x{0.5, -1};
  // direct evaluation of ||A x - y||^2 / 2
  const Vector r = Matrix{{1, 2}, {0, 1}, {1, 0}} * x - Vector{1, 0, 2};
  CHECK(f.value(x) == doctest::Approx(0.5 * dot(r, r)).epsilon(1e-14));
  CHECK_THROWS_AS(QuadraticObjective(Matrix{{1, 0}, {0, -1}}, Vector(2)), Error);
  CHECK_THROWS_AS(QuadraticObjective(Matrix{{1, 1}, {0, 1}}, Vector(2)), Error);
}

TEST_CASE("consensus optimization oracle small cases") {
  const QuadraticObjective half_norm(Matrix::identity(2), Vector(2));
  CHECK(norm(consensus_opt_oracle({half_norm}, Weights::uniform(1))) == 0.0);
  // (x-1)^2/2 and (x-3)^2/2
  const QuadraticObjective a(Matrix{{1}}, Vector{-1});
  const QuadraticObjective b(Matrix{{1}}, Vector{-3});
  CHECK(consensus_opt_oracle({a, b}, Weights::uniform(2))[0] == doctest::Approx(2.0).epsilon(1e-15));
  try {
    consensus_opt_oracle({QuadraticObjective(Matrix(2, 2), Vector(2))}, Weights::uniform(1));
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
}

TEST_CASE("equilibrium of prox agents minimizes the weighted sum for any prox scale") {
  Rng rng(1);
  const std::size_t n = 8;
  std::vector<Matrix> as;
  std::vector<Vector> ys;
  std::vector<QuadraticObjective> fs;
  for (int i = 0; i < 3; ++i) {
    as.push_back(random_matrix(rng, n + 2, n));
    ys.push_back(random_vector(rng, n + 2));
    fs.push_back(QuadraticObjective::least_squares(as.back(), ys.back()));
  }
  const Weights mu({0.2, 0.3, 0.5});
  const Vector oracle = consensus_opt_oracle(fs, mu);
  for (double sigma : {0.3, 1.0, 3.0}) {
    std::vector<Agent> agents;
    for (int i = 0; i < 3; ++i) agents.push_back(quadratic_prox_agent(as[i], ys[i], sigma));
    const Problem p(std::move(agents), mu);
    SolverConfig c;
    c.tol = 1e-11;
    c.krylov_dim = p.stacked_dim();
    const CESolution s = jfnk_solve(p, p.zeros(), c);
    REQUIRE(s.converged);
    CHECK(norm_inf(s.x_star - oracle) <= 1e-7);
    // the oracle point is stationary for the weighted objective
    Vector grad(n);
    for (int i = 0; i < 3; ++i) axpy(mu[i], fs[i].gradient(oracle), grad);
    CHECK(norm(grad) <= 1e-10);
  }
}

TEST_CASE("affine oracle output is an equilibrium") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Problem p = affine_problem(rng, 6, 0.9);
    const CESolution s = extract_solution(p, affine_ce_oracle(p));
    CHECK(is_equilibrium(p, s.x_star, s.u_star, 1e-8));
  }
}

TEST_CASE("affine oracle requires affine agents and reports singular systems") {
  CHECK_THROWS_AS(affine_ce_oracle(make_toy_problem()), Error);
  try {
    const Problem ident({identity_agent(2), identity_agent(2)});
    affine_ce_oracle(ident);
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
}

TEST_CASE("jacobian of identity agents is the averaging reflection") {
  const Problem p({identity_agent(2), identity_agent(2), identity_agent(2)});
  const SpectrumReport r = jacobian_spectrum(p, p.zeros());
  for (const Complex& z : r.eigenvalues) {
    CHECK(std::abs(z.imag()) <= 1e-12);
    CHECK(std::min(std::abs(z - 1.0), std::abs(z + 1.0)) <= 1e-12);
  }
}

TEST_CASE("finite-difference jacobian agrees with the exact one") {
  Rng rng(3);
  const Problem p = affine_problem(rng, 4, 1.02);
  std::vector<Agent> opaque;
  for (const Agent& a : p.agents()) opaque.emplace_back("opaque", a.dim(), [a](const Vector& v) { return a(v); });
  const Problem q(std::move(opaque), p.weights());
  const StackedPoint v(random_vector(rng, p.stacked_dim()), 2);
  CHECK((fixed_point_jacobian(q, v) - affine_fixed_point_jacobian(p)).max_abs() <= 1e-6);
}

TEST_CASE("relaxed spectrum") {
  const std::vector<Complex> eig{Complex(0.5, 0.2), Complex(-0.9, 0), Complex(1.1, -0.3)};
  CHECK(multiset_distance(relaxed_spectrum(eig, 1.0), eig) == 0.0);
  for (const Complex& z : relaxed_spectrum(eig, 1e-9)) CHECK(std::abs(z - 1.0) <= 1e-8);
}

TEST_CASE("spectral law holds for the exact relaxed jacobian") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Problem p = affine_problem(rng, 5, 1.0 + 0.02 * trial);
    const Matrix j = affine_fixed_point_jacobian(p);
    const SpectrumReport r = spectrum_of(j);
    for (double rho : {0.2, 0.5, 0.7}) {
      Matrix jr = rho * j;
      for (std::size_t i = 0; i < jr.rows(); ++i) jr(i, i) += 1.0 - rho;
      CHECK(multiset_distance(eigenvalues(jr), relaxed_spectrum(r.eigenvalues, rho)) <= 1e-9);
    }
  }
}

TEST_CASE("optimal relaxation") {
  // real spectrum in [-0.5, 0.5]: rho = 1 is optimal
  const RelaxationChoice a = optimal_relaxation({Complex(-0.5, 0), Complex(0.5, 0)});
  CHECK(a.rho == 1.0);
  CHECK(a.radius == doctest::Approx(0.5));
  // spectrum {-3, 0.5}: rho (1 + 3) = 2 balances |1 - 4 rho| and |1 - 0.5 rho|
  const RelaxationChoice b = optimal_relaxation({Complex(-3, 0), Complex(0.5, 0)});
  CHECK(b.rho == doctest::Approx(4.0 / 9.0).epsilon(1e-5));
  CHECK(b.radius == doctest::Approx(7.0 / 9.0).epsilon(1e-5));
}

TEST_CASE("rho_star yields a convergent mann run when its radius is small enough") {
  Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 5; ++trial) {
    const Problem p = affine_problem(rng, 5, 1.02);
    const SpectrumReport r = jacobian_spectrum(p, p.zeros());
    if (r.rho_star_radius > 0.98 || r.rho_star >= 1.0) continue;
    SolverConfig c;
    c.rho = r.rho_star;
    c.tol = 1e-8;
    CHECK(mann_solve(p, p.zeros(), c).converged);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("stochastic instances: lipschitz above 1 with stable or unstable spectrum") {
  const StochasticInstance lo = make_stochastic_instance(1.02, kDefaultStochasticSeed);
  const SpectrumReport a = jacobian_spectrum(lo.problem, lo.problem.zeros());
  CHECK(a.lipschitz > 1.0);
  CHECK(a.max_real < 1.0);
  const StochasticInstance hi = make_stochastic_instance(1.06, kDefaultStochasticSeed);
  const SpectrumReport b = jacobian_spectrum(hi.problem, hi.problem.zeros());
  CHECK(b.max_real > 1.0);
  CHECK(b.rho_star_radius >= 1.0);
  // The leading eigenvalue is real here; confirm it with an eigenvector from
  // shifted inverse iteration and the residual ||J x - lambda x||.
  const Complex lead = b.eigenvalues.front();
  REQUIRE(lead.imag() == 0.0);
  Matrix shifted = affine_fixed_point_jacobian(hi.problem);
  const Matrix j = shifted;
  for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) -= lead.real() + 1e-6;
  const LuFactorization lu(shifted);
  Vector x(j.rows(), 1.0);
  for (int it = 0; it < 5; ++it) {
    x = lu.solve(x);
    x *= 1.0 / norm(x);
  }
  CHECK(norm(j * x - lead.real() * x) <= 1e-8);
  Matrix reflected = 2.0 * lo.problem.agents()[1].affine_part().linear;
  for (std::size_t i = 0; i < reflected.rows(); ++i) reflected(i, i) -= 1.0;
  CHECK(spectral_norm(reflected) > 1.0);
}

TEST_CASE("small blended agents: reflected norm matches the singular value oracle") {
  Rng rng(6);
  const Matrix w = row_stochastic_matrix(5, rng);
  Matrix reflected = 2.0 * blended_agent(w, 1.02).affine_part().linear;
  for (std::size_t i = 0; i < 5; ++i) reflected(i, i) -= 1.0;
  double top = 0.0;
  for (const Complex& z : eigenvalues(reflected.transpose() * reflected)) top = std::max(top, z.real());
  CHECK(spectral_norm(reflected) == doctest::Approx(std::sqrt(top)).epsilon(1e-10));
}

TEST_CASE("spectrum json layout") {
  SpectrumReport r;
  r.eigenvalues = {Complex(1.5, -0.25)};
  r.max_real = 1.5;
  std::ostringstream out;
  write_json(out, r);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["eigenvalues"][0][0] == 1.5);
  CHECK(j["eigenvalues"][0][1] == -0.25);
  CHECK(j["max_real"] == 1.5);
}

}  // TEST_SUITE
