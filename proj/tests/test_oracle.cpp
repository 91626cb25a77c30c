#include <catch2/catch_amalgamated.hpp>

#include "hocl/costs.hpp"
#include "hocl/oracle.hpp"
#include "hocl/solver_msa.hpp"
#include "support.hpp"

using namespace hocl;

namespace {

ProblemSpec reference(int n = 30) {
  QuadraticInstanceConfig cfg;
  cfg.N = n;
  cfg.gamma1 = 0.5;
  cfg.gamma2 = 0.5;
  return make_quadratic_instance(cfg);
}

}  // namespace

TEST_CASE("finite-difference control gradients") {
  ProblemSpec prob = reference(6);
  const TimeGrid grid = prob.grid();
  auto u = ControlTrajectory::zeros(grid, Agent::follower, 2);
  SplitMix64 rng(15);
  for (int k = 0; k < grid.N; ++k)
    u.values[k][1] = 2.0 * rng.uniform01() - 1.0;
  const auto& coords = prob.partition.follower_idx;

  SECTION("a constant functional has a zero gradient") {
    auto g = fd_gradient([](const ControlTrajectory&) { return 3.5; }, u,
                         coords, 1e-5);
    for (const auto& v : g) REQUIRE(v.norm() == 0.0);
  }

  SECTION("central differences are exact on linear functionals") {
    Vector c(2);
    c << 0.0, 1.7;
    auto lin = [&](const ControlTrajectory& v) {
      double acc = 0.0;
      for (const auto& val : v.values) acc += c.dot(val);
      return acc;
    };
    for (double eps : {1e-3, 1e-5, 1e-7}) {
      auto g = fd_gradient(lin, u, coords, eps);
      for (const auto& v : g)
        REQUIRE_THAT(v[1], Catch::Matchers::WithinAbs(1.7, 1e-8));
    }
  }

  SECTION("quadratic functional: gradient is delta*u with O(eps^2) error") {
    const double delta = grid.delta();
    auto quad = [&](const ControlTrajectory& v) {
      double acc = 0.0;
      for (const auto& val : v.values) acc += 0.5 * delta * val.squaredNorm();
      return acc;
    };
    // Documented sweep for the step size; central differences keep all of
    // these well under the checking tolerances.
    for (double eps : {1e-4, 1e-5, 1e-6}) {
      auto g = fd_gradient(quad, u, coords, eps);
      for (int k = 0; k < grid.N; ++k)
        REQUIRE_THAT(g[k][1], Catch::Matchers::WithinAbs(delta * u.values[k][1],
                                                         1e-9));
    }
  }
}

TEST_CASE("closed-form quadratic flow") {
  Vector theta0(2), star(2);
  theta0 << 0.0, 0.0;
  star << 1.0, -1.0;
  REQUIRE(analytic_quadratic_state(theta0, star, 0.0) == theta0);
  REQUIRE((analytic_quadratic_state(theta0, star, 50.0) - star).norm() <=
          1e-12);
  Vector at1 = analytic_quadratic_state(theta0, star, 1.0);
  REQUIRE_THAT(at1[0],
               Catch::Matchers::WithinAbs(1.0 - std::exp(-1.0), 1e-15));
  REQUIRE_THAT(at1[1],
               Catch::Matchers::WithinAbs(-1.0 + std::exp(-1.0), 1e-15));
}

TEST_CASE("transcription objective equals the cost of the integrated trajectory") {
  ProblemSpec prob = reference(12);
  const TimeGrid grid = prob.grid();
  SplitMix64 rng(31);
  auto u1 = ControlTrajectory::zeros(grid, Agent::leader, 2);
  auto u2 = ControlTrajectory::zeros(grid, Agent::follower, 2);
  for (int k = 0; k < grid.N; ++k) {
    u1.values[k][0] = clamp_box(2.0 * rng.uniform01() - 1.0, prob.u_max);
    u2.values[k][1] = clamp_box(2.0 * rng.uniform01() - 1.0, prob.u_max);
  }
  StateTrajectory theta = integrate_forward(prob.theta0, u1, u2, grid, prob);

  TranscriptionObjective follower_obj(Agent::follower, prob, grid, u1);
  REQUIRE(follower_obj(u2) == cost_j2(theta, u2, prob));

  TranscriptionObjective leader_obj(Agent::leader, prob, grid, u2);
  REQUIRE(leader_obj(u1) ==
          cost_j1(theta) +
              phi_value(prob.model, theta.values[grid.N], prob.valid_set));
}

TEST_CASE("direct transcription: dominating control cost and degenerate box") {
  SECTION("a huge control weight drives the optimal control to zero") {
    ProblemSpec prob = reference(10);
    prob.beta = 1e6;
    const TimeGrid grid = prob.grid();
    auto u1 = ControlTrajectory::zeros(grid, Agent::leader, 2);
    auto best = direct_transcription_solve(Agent::follower, prob, grid, u1);
    double norm = 0.0;
    for (const auto& v : best.values) norm += v.squaredNorm();
    REQUIRE(std::sqrt(norm) <= 1e-3);
  }

  SECTION("u_max = 0 leaves only the zero trajectory") {
    ProblemSpec prob = reference(10);
    prob.u_max = 0.0;
    const TimeGrid grid = prob.grid();
    auto u1 = ControlTrajectory::zeros(grid, Agent::leader, 2);
    auto best = direct_transcription_solve(Agent::follower, prob, grid, u1);
    for (const auto& v : best.values) REQUIRE(v.norm() == 0.0);
  }
}

TEST_CASE("direct transcription is reproducible and enforces desk scale") {
  ProblemSpec prob = reference(8);
  const TimeGrid grid = prob.grid();
  auto u1 = ControlTrajectory::zeros(grid, Agent::leader, 2);
  OracleOptions fast;
  fast.max_iters = 300;
  auto a = direct_transcription_solve(Agent::follower, prob, grid, u1, fast);
  auto b = direct_transcription_solve(Agent::follower, prob, grid, u1, fast);
  for (int k = 0; k < grid.N; ++k) REQUIRE(a.values[k] == b.values[k]);

  SECTION("scale limits") {
    ProblemSpec big = reference(8);
    Vector star5 = Vector::LinSpaced(5, 1.0, -1.0);
    QuadraticInstanceConfig cfg;
    cfg.theta_star_train = star5;
    cfg.theta_star_valid = 0.5 * star5;
    cfg.theta0 = Vector::Zero(5);
    ProblemSpec wide = make_quadratic_instance(cfg);
    REQUIRE_THROWS_WITH(
        direct_transcription_solve(Agent::leader, wide, wide.grid(),
                                   ControlTrajectory::zeros(wide.grid(),
                                                            Agent::follower, 5)),
        Catch::Matchers::ContainsSubstring("oracle scale"));
    REQUIRE_THROWS_WITH(
        direct_transcription_solve(Agent::follower, big, TimeGrid(1.0, 60),
                                   u1),
        Catch::Matchers::ContainsSubstring("oracle scale"));
  }
}

TEST_CASE("oracle quality on the convex reference instance") {
  ProblemSpec prob = reference(30);
  const TimeGrid grid = prob.grid();

  SolverOptions opts;
  opts.max_outer = 15000;
  auto rep = run_algorithm_1(prob, opts);
  REQUIRE(rep.converged);

  auto oracle_u2 =
      direct_transcription_solve(Agent::follower, prob, grid, rep.u1_final);
  TranscriptionObjective obj(Agent::follower, prob, grid, rep.u1_final);

  // The oracle may not beat the adjoint-based solution by much, but it must
  // not lose to it beyond rounding.
  REQUIRE(obj(oracle_u2) <= obj(rep.u2_final) + 1e-6);

  const double resid = fd_projected_residual(
      [&](const ControlTrajectory& v) { return obj(v); }, oracle_u2,
      prob.partition.follower_idx, prob.u_max, 1e-5);
  REQUIRE(resid <= 1e-5);

  SECTION("leader objective route makes monotone, bounded progress") {
    OracleOptions fast;
    fast.max_iters = 2000;
    auto oracle_u1 = direct_transcription_solve(Agent::leader, prob, grid,
                                                rep.u2_final, fast);
    TranscriptionObjective lobj(Agent::leader, prob, grid, rep.u2_final);
    auto zero = ControlTrajectory::zeros(grid, Agent::leader, 2);
    REQUIRE(lobj(oracle_u1) < lobj(zero));
    const double res0 = fd_projected_residual(
        [&](const ControlTrajectory& v) { return lobj(v); }, zero,
        prob.partition.leader_idx, prob.u_max, 1e-5);
    const double res1 = fd_projected_residual(
        [&](const ControlTrajectory& v) { return lobj(v); }, oracle_u1,
        prob.partition.leader_idx, prob.u_max, 1e-5);
    REQUIRE(res1 <= 0.1 * res0);
    for (const auto& v : oracle_u1.values) {
      REQUIRE(is_masked_to(v, prob.partition.leader_idx));
      REQUIRE(v.lpNorm<Eigen::Infinity>() <= prob.u_max);
    }
  }
}
