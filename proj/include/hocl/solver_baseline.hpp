#pragma once

#include "hocl/solver_common.hpp"

namespace hocl {

/// One gradient-correction update for the follower:
/// u2 <- clamp(u2 - step * (p2 + beta*u2)) on the follower's coordinates.
/// UpdateSign::ascent flips the direction (diagnostic use only).
inline ControlTrajectory follower_gradient_step(
    const ControlTrajectory& u2, const AdjointTrajectory& p2,
    double gamma2_step, const ProblemSpec& prob,
    UpdateSign sign = UpdateSign::descent) {
  require(gamma2_step > 0.0 && gamma2_step <= 1.0,
          "gamma2_step must lie in (0,1]");
  const double dir = sign == UpdateSign::descent ? -1.0 : 1.0;
  ControlTrajectory out = u2;
  for (int k = 0; k < u2.grid.N; ++k) {
    Vector next = Vector::Zero(u2.values[k].size());
    for (int i : prob.partition.follower_idx) {
      const double g = p2.values[k][i] + prob.beta * u2.values[k][i];
      next[i] = clamp_box(u2.values[k][i] + dir * gamma2_step * g, prob.u_max);
    }
    out.values[k] = next;
  }
  return out;
}

/// Leader update: u1 <- clamp(u1 - step * p1) on the leader's coordinates.
inline ControlTrajectory leader_gradient_step(
    const ControlTrajectory& u1, const AdjointTrajectory& p1,
    double gamma1_step, const ProblemSpec& prob,
    UpdateSign sign = UpdateSign::descent) {
  require(gamma1_step > 0.0 && gamma1_step <= 1.0,
          "gamma1_step must lie in (0,1]");
  const double dir = sign == UpdateSign::descent ? -1.0 : 1.0;
  ControlTrajectory out = u1;
  for (int k = 0; k < u1.grid.N; ++k) {
    Vector next = Vector::Zero(u1.values[k].size());
    for (int i : prob.partition.leader_idx) {
      next[i] = clamp_box(u1.values[k][i] + dir * gamma1_step * p1.values[k][i],
                          prob.u_max);
    }
    out.values[k] = next;
  }
  return out;
}

/// Nested successive approximation with gradient-correction control updates.
inline SolveReport run_algorithm_o(const ProblemSpec& prob,
                                   const SolverOptions& opts) {
  return detail::run_nested(
      prob, opts, "baseline",
      [&](const ControlTrajectory& u2, const AdjointTrajectory& p2) {
        return follower_gradient_step(u2, p2, opts.step_gamma2, prob,
                                      opts.update_sign);
      },
      [&](const ControlTrajectory& u1, const AdjointTrajectory& p1) {
        return leader_gradient_step(u1, p1, opts.step_gamma1, prob,
                                    opts.update_sign);
      });
}

}  // namespace hocl
