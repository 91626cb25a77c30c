#pragma once

#include "hocl/problem.hpp"
#include "hocl/trajectory.hpp"
#include "hocl/types.hpp"

namespace hocl {

/// Trapezoidal quadrature of (1/2)||theta(t)||^2 over [0, T].
inline double cost_j1(const StateTrajectory& theta) {
  const int n = theta.grid.N;
  const double delta = theta.grid.delta();
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * 0.5 * theta.values[k].squaredNorm();
  }
  return delta * acc;
}

/// Quadrature of (alpha/2)||theta||^2 + (beta/2)||u2||^2 over [0, T]:
/// trapezoid on the state nodes, exact piecewise-constant sum for the
/// control.
inline double cost_j2(const StateTrajectory& theta, const ControlTrajectory& u2,
                      const ProblemSpec& prob) {
  require(theta.grid == u2.grid, "state and control grids must match");
  const int n = theta.grid.N;
  const double delta = theta.grid.delta();
  double state_acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    state_acc += w * theta.values[k].squaredNorm();
  }
  double control_acc = 0.0;
  for (int k = 0; k < n; ++k) control_acc += u2.values[k].squaredNorm();
  return delta * (0.5 * prob.alpha * state_acc + 0.5 * prob.beta * control_acc);
}

}  // namespace hocl
