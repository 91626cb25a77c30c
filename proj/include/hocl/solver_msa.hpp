#pragma once

#include <cmath>

#include "hocl/solver_common.hpp"

namespace hocl {

/// Pointwise minimizer over the box of the follower's augmented Hamiltonian
/// at one time node: argmin <u,p> + (beta/2)||u||^2 + (gamma2/2)||u-ubar||^2,
/// separable per coordinate, so the closed form is
/// clamp((gamma2*ubar - p)/(beta + gamma2)). Coordinates outside the
/// follower's set stay zero.
inline Vector argmin_augh_follower(const Vector& p2_t, const Vector& u2_bar_t,
                                   const ProblemSpec& prob) {
  require(prob.gamma2 >= 0.0 && prob.gamma2 < 1.0, "gamma2 must lie in [0,1)");
  Vector out = Vector::Zero(p2_t.size());
  for (int i : prob.partition.follower_idx) {
    const double num = prob.gamma2 * u2_bar_t[i] - p2_t[i];
    out[i] = clamp_box(num / (prob.beta + prob.gamma2), prob.u_max);
  }
  return out;
}

/// Leader counterpart: argmin <u,p> + (gamma1/2)||u-ubar||^2 over the box.
/// For gamma1 > 0 the minimizer is clamp(ubar - p/gamma1); at gamma1 = 0 the
/// objective is linear in u and the minimizer is bang-bang, -u_max*sign(p),
/// with sign(0) resolved to 0.
inline Vector argmin_augh_leader(const Vector& p1_t, const Vector& u1_bar_t,
                                 const ProblemSpec& prob) {
  require(prob.gamma1 >= 0.0 && prob.gamma1 < 1.0, "gamma1 must lie in [0,1)");
  Vector out = Vector::Zero(p1_t.size());
  for (int i : prob.partition.leader_idx) {
    if (prob.gamma1 == 0.0) {
      if (p1_t[i] > 0.0)
        out[i] = -prob.u_max;
      else if (p1_t[i] < 0.0)
        out[i] = prob.u_max;
      else
        out[i] = 0.0;
    } else {
      out[i] = clamp_box(u1_bar_t[i] - p1_t[i] / prob.gamma1, prob.u_max);
    }
  }
  return out;
}

/// Nested successive approximation with exact pointwise minimization of the
/// augmented Hamiltonians as the control updates.
inline SolveReport run_algorithm_1(const ProblemSpec& prob,
                                   const SolverOptions& opts) {
  return detail::run_nested(
      prob, opts, "msa",
      [&](const ControlTrajectory& u2, const AdjointTrajectory& p2) {
        ControlTrajectory out = u2;
        for (int k = 0; k < u2.grid.N; ++k)
          out.values[k] =
              argmin_augh_follower(p2.values[k], u2.values[k], prob);
        return out;
      },
      [&](const ControlTrajectory& u1, const AdjointTrajectory& p1) {
        ControlTrajectory out = u1;
        for (int k = 0; k < u1.grid.N; ++k)
          out.values[k] = argmin_augh_leader(p1.values[k], u1.values[k], prob);
        return out;
      });
}

}  // namespace hocl
