#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hocl/model.hpp"
#include "hocl/problem.hpp"
#include "hocl/trajectory.hpp"
#include "hocl/types.hpp"

namespace hocl {

namespace detail {

struct Rk4Workspace {
  Vector k1, k2, k3, k4, x, tmp;
  void ensure(int p) {
    if (k1.size() != p) {
      k1.resize(p);
      k2.resize(p);
      k3.resize(p);
      k4.resize(p);
      x.resize(p);
      tmp.resize(p);
    }
  }
};

// theta' = -grad J0(theta) + drive, drive constant over the step.
inline void forward_rhs(const BoundModel& m, const Vector& x,
                        const Vector& drive, Vector& out) {
  m.grad_into(x, out);
  out *= -1.0;
  out += drive;
}

inline void rk4_forward_step(const BoundModel& m, Vector& x,
                             const Vector& drive, double h, Rk4Workspace& w) {
  forward_rhs(m, x, drive, w.k1);
  w.x = x + (h / 2.0) * w.k1;
  forward_rhs(m, w.x, drive, w.k2);
  w.x = x + (h / 2.0) * w.k2;
  forward_rhs(m, w.x, drive, w.k3);
  w.x = x + h * w.k3;
  forward_rhs(m, w.x, drive, w.k4);
  x += (h / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

inline void check_finite(const Vector& x, int node) {
  if (!x.allFinite())
    throw std::runtime_error("blow-up: non-finite state at node " +
                             std::to_string(node));
}

// Integrate forward over n steps of size h with per-step additive drive,
// writing nodes[0..n] (nodes[0] = x0 on entry must already be set by caller).
inline void rk4_forward_nodes(const BoundModel& m,
                              const std::vector<Vector>& drive, double h,
                              std::vector<Vector>& nodes, Rk4Workspace& w) {
  const int n = static_cast<int>(drive.size());
  w.ensure(static_cast<int>(nodes[0].size()));
  for (int k = 0; k < n; ++k) {
    nodes[k + 1] = nodes[k];
    rk4_forward_step(m, nodes[k + 1], drive[k], h, w);
    check_finite(nodes[k + 1], k + 1);
  }
}

// p' = hvp(p) - state_weight * theta(t), integrated backward from nodes[n]
// to nodes[0]; theta between nodes is linearly interpolated, so the half
// stage uses the node average.
inline void rk4_backward_nodes(const BoundModel& m,
                               const std::vector<Vector>& theta, double h,
                               double state_weight, std::vector<Vector>& p,
                               Rk4Workspace& w) {
  const int n = static_cast<int>(theta.size()) - 1;
  w.ensure(static_cast<int>(theta[0].size()));
  auto rhs = [&](const Vector& pv, const Vector& th, Vector& out) {
    m.hvp_into(pv, out);
    out -= state_weight * th;
  };
  Vector mid(theta[0].size());
  for (int k = n - 1; k >= 0; --k) {
    const Vector& pk1 = p[k + 1];
    mid = 0.5 * (theta[k] + theta[k + 1]);
    rhs(pk1, theta[k + 1], w.k1);
    w.x = pk1 - (h / 2.0) * w.k1;
    rhs(w.x, mid, w.k2);
    w.x = pk1 - (h / 2.0) * w.k2;
    rhs(w.x, mid, w.k3);
    w.x = pk1 - h * w.k3;
    rhs(w.x, theta[k], w.k4);
    p[k] = pk1 - (h / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
    check_finite(p[k], k);
  }
}

struct AdjointWorkspace {
  Vector a1, a2, a3, a4, b, lam;
  void ensure(int p) {
    if (lam.size() != p) {
      a1.resize(p);
      a2.resize(p);
      a3.resize(p);
      a4.resize(p);
      b.resize(p);
      lam.resize(p);
    }
  }
};

// Exact gradient, w.r.t. the per-interval additive drive, of
//   sum_k h*omega_k*(state_weight/2)*||theta_k||^2           (trapezoid)
// + sum_k h*(control_weight/2)*||u_k||^2
// + terminal(theta_n), with d terminal/d theta_n = terminal_grad,
// obtained by transposing the RK4 one-step maps. The model's gradient field
// is affine in theta, so no stage values need to be stored.
inline void rk4_cost_gradient_into(const BoundModel& m,
                                   const std::vector<Vector>& theta, double h,
                                   double state_weight, double control_weight,
                                   const std::vector<Vector>& u,
                                   const Vector& terminal_grad,
                                   std::vector<Vector>& grad,
                                   AdjointWorkspace& w) {
  const int n = static_cast<int>(theta.size()) - 1;
  const int p = static_cast<int>(theta[0].size());
  w.ensure(p);
  w.lam = (h * 0.5 * state_weight) * theta[n] + terminal_grad;
  for (int k = n - 1; k >= 0; --k) {
    w.a1 = (h / 6.0) * w.lam;
    w.a2 = (h / 3.0) * w.lam;
    w.a3 = (h / 3.0) * w.lam;
    w.a4 = (h / 6.0) * w.lam;
    m.hvp_into(w.a4, w.b);
    w.b *= -1.0;
    w.lam += w.b;
    w.a3 += h * w.b;
    m.hvp_into(w.a3, w.b);
    w.b *= -1.0;
    w.lam += w.b;
    w.a2 += (h / 2.0) * w.b;
    m.hvp_into(w.a2, w.b);
    w.b *= -1.0;
    w.lam += w.b;
    w.a1 += (h / 2.0) * w.b;
    m.hvp_into(w.a1, w.b);
    w.b *= -1.0;
    w.lam += w.b;
    grad[k] = w.a1 + w.a2 + w.a3 + w.a4;
    if (control_weight != 0.0) grad[k] += (h * control_weight) * u[k];
    const double omega = (k == 0) ? 0.5 : 1.0;
    w.lam += (h * omega * state_weight) * theta[k];
  }
}

}  // namespace detail

/// Forward sweep: RK4 on theta' = -grad J0(theta) + u1(t) + u2(t) with the
/// controls held constant on each interval.
inline StateTrajectory integrate_forward(const Vector& theta0,
                                         const ControlTrajectory& u1,
                                         const ControlTrajectory& u2,
                                         const TimeGrid& grid,
                                         const BoundModel& train) {
  require(u1.grid == grid && u2.grid == grid, "control grids must match");
  require(static_cast<int>(u1.values.size()) == grid.N &&
              static_cast<int>(u2.values.size()) == grid.N,
          "control trajectories must carry one value per interval");
  StateTrajectory theta;
  theta.grid = grid;
  theta.values.assign(grid.num_nodes(), theta0);
  std::vector<Vector> drive(grid.N);
  for (int k = 0; k < grid.N; ++k) drive[k] = u1.values[k] + u2.values[k];
  detail::Rk4Workspace w;
  detail::rk4_forward_nodes(train, drive, grid.delta(), theta.values, w);
  return theta;
}

inline StateTrajectory integrate_forward(const Vector& theta0,
                                         const ControlTrajectory& u1,
                                         const ControlTrajectory& u2,
                                         const TimeGrid& grid,
                                         const ProblemSpec& prob) {
  return integrate_forward(theta0, u1, u2, grid,
                           BoundModel(prob.model, prob.train_set));
}

/// Backward sweep for the costate. Follower: p' = hvp(p) - alpha*theta with
/// p(T) = 0. Leader: p' = hvp(p) - theta with p(T) = -grad phi(theta(T)).
inline AdjointTrajectory integrate_adjoint(Agent agent,
                                           const StateTrajectory& theta,
                                           const TimeGrid& grid,
                                           const ProblemSpec& prob,
                                           const BoundModel& train,
                                           const BoundModel& valid) {
  require(theta.grid == grid, "state grid must match");
  AdjointTrajectory adj;
  adj.grid = grid;
  adj.agent = agent;
  adj.values.assign(grid.num_nodes(), Vector::Zero(theta.values[0].size()));
  double weight = 1.0;
  if (agent == Agent::follower) {
    weight = prob.alpha;
    adj.values[grid.N].setZero();
  } else {
    adj.values[grid.N] = -valid.grad(theta.values[grid.N]);
  }
  detail::Rk4Workspace w;
  detail::rk4_backward_nodes(train, theta.values, grid.delta(), weight,
                             adj.values, w);
  return adj;
}

inline AdjointTrajectory integrate_adjoint(Agent agent,
                                           const StateTrajectory& theta,
                                           const TimeGrid& grid,
                                           const ProblemSpec& prob) {
  return integrate_adjoint(agent, theta, grid, prob,
                           BoundModel(prob.model, prob.train_set),
                           BoundModel(prob.model, prob.valid_set));
}

/// Costate driving the solvers' leader updates. Same backward dynamics as
/// integrate_adjoint, but the leader terminal value is +grad phi(theta(T)),
/// which makes dH1/du1 = p the descent gradient of the running-cost plus
/// validation-map composite, so stepping against it steers toward the
/// target set. (integrate_adjoint keeps the stated boundary condition
/// -grad phi; the two differ only in the sign of the terminal sensitivity.)
/// For the follower both versions coincide.
inline AdjointTrajectory integrate_descent_adjoint(Agent agent,
                                                   const StateTrajectory& theta,
                                                   const TimeGrid& grid,
                                                   const ProblemSpec& prob,
                                                   const BoundModel& train,
                                                   const BoundModel& valid) {
  if (agent == Agent::follower)
    return integrate_adjoint(agent, theta, grid, prob, train, valid);
  require(theta.grid == grid, "state grid must match");
  AdjointTrajectory adj;
  adj.grid = grid;
  adj.agent = agent;
  adj.values.assign(grid.num_nodes(), Vector::Zero(theta.values[0].size()));
  adj.values[grid.N] = valid.grad(theta.values[grid.N]);
  detail::Rk4Workspace w;
  detail::rk4_backward_nodes(train, theta.values, grid.delta(), 1.0,
                             adj.values, w);
  return adj;
}

inline AdjointTrajectory integrate_descent_adjoint(Agent agent,
                                                   const StateTrajectory& theta,
                                                   const TimeGrid& grid,
                                                   const ProblemSpec& prob) {
  return integrate_descent_adjoint(agent, theta, grid, prob,
                                   BoundModel(prob.model, prob.train_set),
                                   BoundModel(prob.model, prob.valid_set));
}

/// Pontryagin function at one time node. The follower carries its own
/// running cost; the leader carries the plain state cost and no control
/// penalty.
inline double hamiltonian(Agent agent, const Vector& theta, const Vector& p,
                          const Vector& u1, const Vector& u2,
                          const ProblemSpec& prob, const BoundModel& train) {
  Vector velocity = -train.grad(theta) + u1 + u2;
  const double base = velocity.dot(p);
  if (agent == Agent::follower)
    return base + 0.5 * prob.alpha * theta.squaredNorm() +
           0.5 * prob.beta * u2.squaredNorm();
  return base + 0.5 * theta.squaredNorm();
}

inline double hamiltonian(Agent agent, const Vector& theta, const Vector& p,
                          const Vector& u1, const Vector& u2,
                          const ProblemSpec& prob) {
  return hamiltonian(agent, theta, p, u1, u2, prob,
                     BoundModel(prob.model, prob.train_set));
}

/// Augmented Hamiltonian with both penalty terms frozen at the nominal
/// (theta, p). Under that convention the dynamics-gradient difference equals
/// u - u_bar on the agent's coordinates and the theta-gradient difference
/// vanishes, so the augmentation is the single proximal term below.
inline double augmented_hamiltonian(Agent agent, const Vector& theta,
                                    const Vector& p, const Vector& u_bar,
                                    const Vector& u, const Vector& u_other,
                                    double gamma, const ProblemSpec& prob,
                                    const BoundModel& train) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
  const Vector& u1 = agent == Agent::leader ? u : u_other;
  const Vector& u2 = agent == Agent::leader ? u_other : u;
  const double base = hamiltonian(agent, theta, p, u1, u2, prob, train);
  return base + 0.5 * gamma * (u - u_bar).squaredNorm();
}

inline double augmented_hamiltonian(Agent agent, const Vector& theta,
                                    const Vector& p, const Vector& u_bar,
                                    const Vector& u, const Vector& u_other,
                                    double gamma, const ProblemSpec& prob) {
  return augmented_hamiltonian(agent, theta, p, u_bar, u, u_other, gamma, prob,
                               BoundModel(prob.model, prob.train_set));
}

struct ResidualNorms {
  double projected = 0.0;  // discrete L2 norm of u - clamp(u - dH/du)
  double raw = 0.0;        // discrete L2 norm of dH/du on the agent's coords
};

/// Box-projected stationarity measure of the extremum condition. At each
/// control node, g = p + beta*u (follower) or g = p (leader) restricted to
/// the agent's coordinates; the residual is sqrt(delta * sum ||u - clamp(u -
/// g)||^2). Interior points reduce to the plain gradient norm.
inline ResidualNorms extremum_residual_norms(Agent agent,
                                             const AdjointTrajectory& p,
                                             const ControlTrajectory& u1,
                                             const ControlTrajectory& u2,
                                             const ProblemSpec& prob) {
  const ControlTrajectory& u = agent == Agent::leader ? u1 : u2;
  require(p.grid == u.grid, "adjoint and control grids must match");
  const auto& coords = prob.partition.coords(agent);
  const double delta = u.grid.delta();
  double acc = 0.0, acc_raw = 0.0;
  for (int k = 0; k < u.grid.N; ++k) {
    for (int i : coords) {
      const double g = agent == Agent::follower
                           ? p.values[k][i] + prob.beta * u.values[k][i]
                           : p.values[k][i];
      const double r =
          u.values[k][i] - clamp_box(u.values[k][i] - g, prob.u_max);
      acc += r * r;
      acc_raw += g * g;
    }
  }
  return {std::sqrt(delta * acc), std::sqrt(delta * acc_raw)};
}

inline double extremum_residual(Agent agent, const AdjointTrajectory& p,
                                const ControlTrajectory& u1,
                                const ControlTrajectory& u2,
                                const ProblemSpec& prob) {
  return extremum_residual_norms(agent, p, u1, u2, prob).projected;
}

/// Exact gradient of the discretized follower cost (trapezoid state term,
/// piecewise-constant control term) w.r.t. each follower control value,
/// masked to the follower's coordinates.
inline std::vector<Vector> follower_cost_gradient(const StateTrajectory& theta,
                                                  const ControlTrajectory& u2,
                                                  const ProblemSpec& prob,
                                                  const BoundModel& train) {
  const int n = theta.grid.N;
  std::vector<Vector> grad(n);
  detail::AdjointWorkspace w;
  Vector terminal = Vector::Zero(theta.values[0].size());
  detail::rk4_cost_gradient_into(train, theta.values, theta.grid.delta(),
                                 prob.alpha, prob.beta, u2.values, terminal,
                                 grad, w);
  for (auto& g : grad) g = masked(g, prob.partition.follower_idx);
  return grad;
}

/// Exact gradient of the discretized leader composite (running state cost
/// plus the validation map at the final node) w.r.t. each leader control
/// value, masked to the leader's coordinates. The follower's control is
/// treated as fixed.
inline std::vector<Vector> leader_cost_gradient(const StateTrajectory& theta,
                                                const ProblemSpec& prob,
                                                const BoundModel& train,
                                                const BoundModel& valid) {
  const int n = theta.grid.N;
  std::vector<Vector> grad(n);
  detail::AdjointWorkspace w;
  Vector terminal = valid.grad(theta.values[theta.grid.N]);
  std::vector<Vector> unused;
  detail::rk4_cost_gradient_into(train, theta.values, theta.grid.delta(), 1.0,
                                 0.0, unused, terminal, grad, w);
  for (auto& g : grad) g = masked(g, prob.partition.leader_idx);
  return grad;
}


/// Costate consistent with the discretized costs, defined through the exact
/// per-interval reverse-mode gradients: at control nodes,
///   follower p(t_k) = g_k/delta - beta*u2(t_k)   (g = d J2 / d u2)
///   leader   p(t_k) = g_k/delta                  (g = d (J1+phi) / d u1)
/// and the terminal node carries the boundary value (0, or +grad phi for
/// the leader descent convention). Feeding these values to the update
/// formulas or to extremum_residual reproduces the discrete gradients
/// exactly, which keeps the sweep updates monotone and lets the projected
/// residual reach machine zero at the discrete stationary point.
inline AdjointTrajectory descent_costate(Agent agent,
                                         const StateTrajectory& theta,
                                         const ControlTrajectory& u2,
                                         const TimeGrid& grid,
                                         const ProblemSpec& prob,
                                         const BoundModel& train,
                                         const BoundModel& valid) {
  AdjointTrajectory adj;
  adj.grid = grid;
  adj.agent = agent;
  adj.values.assign(grid.num_nodes(), Vector::Zero(theta.values[0].size()));
  const double delta = grid.delta();
  if (agent == Agent::follower) {
    auto grad = follower_cost_gradient(theta, u2, prob, train);
    for (int k = 0; k < grid.N; ++k) {
      adj.values[k] = grad[k] / delta;
      for (int i : prob.partition.follower_idx)
        adj.values[k][i] -= prob.beta * u2.values[k][i];
    }
    adj.values[grid.N].setZero();
  } else {
    auto grad = leader_cost_gradient(theta, prob, train, valid);
    for (int k = 0; k < grid.N; ++k) adj.values[k] = grad[k] / delta;
    adj.values[grid.N] = valid.grad(theta.values[grid.N]);
  }
  return adj;
}

}  // namespace hocl
