#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "hocl/costs.hpp"
#include "hocl/dynamics.hpp"
#include "hocl/problem.hpp"

namespace hocl {

/// Central finite differences of a control functional, one entry per
/// node/coordinate in the owning mask (zeros elsewhere).
inline std::vector<Vector> fd_gradient(
    const std::function<double(const ControlTrajectory&)>& cost,
    const ControlTrajectory& u, const std::vector<int>& coords, double eps) {
  require(eps > 0.0, "fd step must be positive");
  std::vector<Vector> grad(u.values.size());
  ControlTrajectory probe = u;
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    grad[k] = Vector::Zero(u.values[k].size());
    for (int i : coords) {
      const double saved = probe.values[k][i];
      probe.values[k][i] = saved + eps;
      const double up = cost(probe);
      probe.values[k][i] = saved - eps;
      const double down = cost(probe);
      probe.values[k][i] = saved;
      grad[k][i] = (up - down) / (2.0 * eps);
    }
  }
  return grad;
}

/// Closed form for the uncontrolled flow when grad J0(theta) = theta -
/// theta_star: theta(t) = theta_star + e^{-t} (theta0 - theta_star).
inline Vector analytic_quadratic_state(const Vector& theta0,
                                       const Vector& theta_star, double t) {
  return theta_star + std::exp(-t) * (theta0 - theta_star);
}

/// Discretized cost of one agent's control problem with the other agent's
/// control frozen, evaluated by a fused forward-integration pass. Matches
/// cost_j2 / cost_j1 + phi on the integrated trajectory operation for
/// operation.
class TranscriptionObjective {
 public:
  TranscriptionObjective(Agent agent, const ProblemSpec& prob,
                         const TimeGrid& grid, ControlTrajectory frozen_other)
      : agent_(agent),
        prob_(prob),
        grid_(grid),
        frozen_(std::move(frozen_other)),
        train_(prob.model, prob.train_set),
        valid_(prob.model, prob.valid_set) {}

  double operator()(const ControlTrajectory& u) const {
    const double h = grid_.delta();
    Vector x = prob_.theta0;
    double state_acc = 0.5 * x.squaredNorm();
    double control_acc = 0.0;
    detail::Rk4Workspace w;
    w.ensure(static_cast<int>(x.size()));
    Vector drive(x.size());
    for (int k = 0; k < grid_.N; ++k) {
      const Vector& u1 = agent_ == Agent::leader ? u.values[k] : frozen_.values[k];
      const Vector& u2 = agent_ == Agent::leader ? frozen_.values[k] : u.values[k];
      drive = u1 + u2;
      detail::rk4_forward_step(train_, x, drive, h, w);
      detail::check_finite(x, k + 1);
      const double weight = (k + 1 == grid_.N) ? 0.5 : 1.0;
      state_acc += weight * x.squaredNorm();
      if (agent_ == Agent::follower) control_acc += u2.squaredNorm();
    }
    if (agent_ == Agent::follower)
      return h * (0.5 * prob_.alpha * state_acc +
                  0.5 * prob_.beta * control_acc);
    return h * 0.5 * state_acc + valid_.loss(x);
  }

 private:
  Agent agent_;
  const ProblemSpec& prob_;
  TimeGrid grid_;
  ControlTrajectory frozen_;
  BoundModel train_;
  BoundModel valid_;
};

/// Projected stationarity of a control functional measured with finite
/// differences only: sqrt(delta * sum ||u - clamp(u - fd_grad)||^2).
inline double fd_projected_residual(
    const std::function<double(const ControlTrajectory&)>& cost,
    const ControlTrajectory& u, const std::vector<int>& coords, double u_max,
    double eps) {
  const auto grad = fd_gradient(cost, u, coords, eps);
  double acc = 0.0;
  for (std::size_t k = 0; k < u.values.size(); ++k)
    for (int i : coords) {
      const double r =
          u.values[k][i] - clamp_box(u.values[k][i] - grad[k][i], u_max);
      acc += r * r;
    }
  return std::sqrt(u.grid.delta() * acc);
}

struct OracleOptions {
  int max_iters = 10000;
  double eps = 1e-5;  // finite-difference step
};

/// Ground-truth solver for one agent's discretized control problem at desk
/// scale: all masked node values form one decision vector, minimized by
/// projected gradient with finite-difference gradients and diminishing steps
/// s_i = s0 / sqrt(1 + i). Avoids the adjoint machinery entirely so it can
/// check it. Returns the best iterate found.
inline ControlTrajectory direct_transcription_solve(
    Agent agent, const ProblemSpec& prob, const TimeGrid& grid,
    const ControlTrajectory& frozen_other_control,
    const OracleOptions& opts = {}) {
  if (prob.param_dim() > 4 || grid.N > 50)
    throw std::invalid_argument("oracle scale: requires p <= 4 and N <= 50");
  const auto& coords = prob.partition.coords(agent);
  TranscriptionObjective objective(agent, prob, grid, frozen_other_control);
  auto cost = [&](const ControlTrajectory& v) { return objective(v); };

  ControlTrajectory u = ControlTrajectory::zeros(grid, agent, prob.param_dim());
  ControlTrajectory best = u;
  double best_value = cost(u);
  const double s0 = 1.0 / (grid.delta() * (prob.alpha + prob.beta + 1.0));
  for (int it = 0; it < opts.max_iters; ++it) {
    const auto grad = fd_gradient(cost, u, coords, opts.eps);
    const double step = s0 / std::sqrt(1.0 + it);
    for (int k = 0; k < grid.N; ++k) {
      Vector next = Vector::Zero(prob.param_dim());
      for (int i : coords)
        next[i] = clamp_box(u.values[k][i] - step * grad[k][i], prob.u_max);
      u.values[k] = next;
    }
    const double value = cost(u);
    if (value < best_value) {
      best_value = value;
      best = u;
    }
  }
  return best;
}

}  // namespace hocl
