#pragma once

#include <cmath>
#include <vector>

#include "hocl/types.hpp"

namespace hocl {

/// Uniform grid on [0, T] with N intervals. Nodes are computed from the
/// closed formula k*T/N rather than accumulated, so there is no drift.
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double horizon, int intervals) : T(horizon), N(intervals) {
    require(horizon > 0.0, "horizon T must be positive");
    require(intervals >= 1, "grid must have at least one interval");
  }

  double delta() const { return T / N; }
  int num_nodes() const { return N + 1; }
  double node(int k) const { return k == N ? T : k * T / N; }

  bool operator==(const TimeGrid& other) const {
    return T == other.T && N == other.N;
  }
};

/// Disjoint coordinate sets owned by the two agents. Together they must
/// cover {0, ..., p-1}. A follower set may be empty only in the degenerate
/// single-parameter case (see ProblemSpec::validate).
struct ControlPartition {
  std::vector<int> leader_idx;
  std::vector<int> follower_idx;

  static ControlPartition first_half_to_leader(int p) {
    ControlPartition part;
    const int split = (p + 1) / 2;
    for (int i = 0; i < split; ++i) part.leader_idx.push_back(i);
    for (int i = split; i < p; ++i) part.follower_idx.push_back(i);
    return part;
  }

  const std::vector<int>& coords(Agent a) const {
    return a == Agent::leader ? leader_idx : follower_idx;
  }

  /// Disjointness and exact cover of {0,...,p-1}.
  void validate_cover(int p) const {
    std::vector<int> seen(p, 0);
    auto mark = [&](const std::vector<int>& idx) {
      for (int i : idx) {
        require(i >= 0 && i < p, "partition index out of range");
        require(seen[i] == 0, "partition sets must be disjoint");
        seen[i] = 1;
      }
    };
    mark(leader_idx);
    mark(follower_idx);
    for (int i = 0; i < p; ++i)
      require(seen[i] == 1, "partition must cover every coordinate");
  }
};

}  // namespace hocl
