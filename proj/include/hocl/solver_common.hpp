#pragma once

#include <chrono>
#include <string>

#include "hocl/costs.hpp"
#include "hocl/dynamics.hpp"
#include "hocl/options.hpp"
#include "hocl/report.hpp"

namespace hocl {
namespace detail {

class StopWatch {
 public:
  StopWatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Shared nested loop: inner follower response sweeps, then one leader
/// forward/backward evaluation, terminating on the leader's projected
/// residual. FollowerUpdate and LeaderUpdate map (control, adjoint) to the
/// next control iterate; they are the only difference between the baseline
/// and the augmented-Hamiltonian solvers.
template <typename FollowerUpdate, typename LeaderUpdate>
SolveReport run_nested(const ProblemSpec& prob, const SolverOptions& opts,
                       const std::string& tag, FollowerUpdate&& follower_update,
                       LeaderUpdate&& leader_update) {
  prob.validate();
  opts.validate();
  const BoundModel train(prob.model, prob.train_set);
  const BoundModel valid(prob.model, prob.valid_set);
  const TimeGrid grid = prob.grid();
  const int p = prob.param_dim();

  ControlTrajectory u1 = ControlTrajectory::zeros(grid, Agent::leader, p);
  ControlTrajectory u2 = ControlTrajectory::zeros(grid, Agent::follower, p);

  SolveReport rep;
  rep.algorithm = tag;
  rep.seed = opts.seed;
  rep.per_phase_time_s = {{"follower_sweep", 0.0}, {"leader_sweep", 0.0}};

  StopWatch wall;
  StateTrajectory theta;
  AdjointTrajectory p1;
  double follower_res = 0.0, follower_raw = 0.0;

  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    {
      StopWatch phase;
      for (int sweep = 0; sweep < opts.inner_iters; ++sweep) {
        theta = integrate_forward(prob.theta0, u1, u2, grid, train);
        AdjointTrajectory p2 = descent_costate(Agent::follower, theta, u2,
                                               grid, prob, train, valid);
        const ResidualNorms norms =
            extremum_residual_norms(Agent::follower, p2, u1, u2, prob);
        follower_res = norms.projected;
        follower_raw = norms.raw;
        if (follower_res <= prob.eps_tol * 0.1) break;
        u2 = follower_update(u2, p2);
        if (opts.follower_sweep_observer) {
          StateTrajectory probe =
              integrate_forward(prob.theta0, u1, u2, grid, train);
          opts.follower_sweep_observer(outer, sweep,
                                       cost_j2(probe, u2, prob));
        }
      }
      rep.per_phase_time_s["follower_sweep"] += phase.seconds();
    }

    StopWatch phase;
    theta = integrate_forward(prob.theta0, u1, u2, grid, train);
    p1 = descent_costate(Agent::leader, theta, u2, grid, prob, train, valid);
    const ResidualNorms lnorms =
        extremum_residual_norms(Agent::leader, p1, u1, u2, prob);
    rep.per_phase_time_s["leader_sweep"] += phase.seconds();

    HistoryRow row;
    row.iter = outer;
    row.leader_residual = lnorms.projected;
    row.follower_residual = follower_res;
    row.j1 = cost_j1(theta);
    row.j2 = cost_j2(theta, u2, prob);
    row.phi_gap = valid.loss(theta.values[grid.N]) - prob.z_target;
    row.wall_s = wall.seconds();
    row.leader_grad_raw = lnorms.raw;
    row.follower_grad_raw = follower_raw;
    rep.history.push_back(row);
    rep.outer_iters = outer;

    if (lnorms.projected <= prob.eps_tol) {
      rep.converged = true;
      break;
    }
    if (outer == opts.max_outer) break;
    u1 = leader_update(u1, p1);
  }

  rep.theta_final = theta.values[grid.N];
  rep.j1 = rep.history.back().j1;
  rep.j2 = rep.history.back().j2;
  rep.phi_gap = rep.history.back().phi_gap;
  rep.u1_final = u1;
  rep.u2_final = u2;
  rep.wall_time_s = wall.seconds();
  return rep;
}

}  // namespace detail
}  // namespace hocl
