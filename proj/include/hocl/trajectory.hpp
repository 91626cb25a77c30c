#pragma once

#include <filesystem>
#include <fstream>
#include <vector>

#include "hocl/grid.hpp"
#include "hocl/types.hpp"

namespace hocl {

/// Piecewise-constant control on [t_k, t_{k+1}), one p-vector per interval.
/// Values are full-length vectors masked to the owning agent's coordinates.
struct ControlTrajectory {
  TimeGrid grid;
  Agent agent = Agent::leader;
  std::vector<Vector> values;  // size N

  static ControlTrajectory zeros(const TimeGrid& g, Agent a, int p) {
    ControlTrajectory u;
    u.grid = g;
    u.agent = a;
    u.values.assign(g.N, Vector::Zero(p));
    return u;
  }

  int param_dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
};

/// Parameter values at every grid node, size N+1.
struct StateTrajectory {
  TimeGrid grid;
  std::vector<Vector> values;
};

/// Costate values at every grid node, size N+1.
struct AdjointTrajectory {
  TimeGrid grid;
  Agent agent = Agent::follower;
  std::vector<Vector> values;
};

namespace detail {

inline void write_node_csv(std::ofstream& out, const TimeGrid& grid,
                           const std::vector<Vector>& values,
                           const std::string& prefix) {
  out.precision(17);
  const int p = static_cast<int>(values.at(0).size());
  out << "t";
  for (int j = 0; j < p; ++j) out << "," << prefix << "_" << j;
  out << "\n";
  for (std::size_t k = 0; k < values.size(); ++k) {
    out << grid.node(static_cast<int>(k));
    for (int j = 0; j < p; ++j) out << "," << values[k][j];
    out << "\n";
  }
}

}  // namespace detail

/// Columns: t, theta_0..theta_{p-1}, one row per node.
inline void write_csv(const StateTrajectory& traj,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  detail::write_node_csv(out, traj.grid, traj.values, "theta");
}

/// Columns: t, p_0..p_{p-1}, one row per node.
inline void write_csv(const AdjointTrajectory& traj,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  detail::write_node_csv(out, traj.grid, traj.values, "p");
}

/// Columns: t, theta_0.., p_0.., one row per node.
inline void write_csv(const StateTrajectory& theta, const AdjointTrajectory& adj,
                      const std::filesystem::path& path) {
  require(theta.grid == adj.grid, "state and adjoint grids differ");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  const int p = static_cast<int>(theta.values.at(0).size());
  out << "t";
  for (int j = 0; j < p; ++j) out << ",theta_" << j;
  for (int j = 0; j < p; ++j) out << ",p_" << j;
  out << "\n";
  for (std::size_t k = 0; k < theta.values.size(); ++k) {
    out << theta.grid.node(static_cast<int>(k));
    for (int j = 0; j < p; ++j) out << "," << theta.values[k][j];
    for (int j = 0; j < p; ++j) out << "," << adj.values[k][j];
    out << "\n";
  }
}

}  // namespace hocl
