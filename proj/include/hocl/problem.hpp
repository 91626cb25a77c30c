#pragma once

#include "hocl/dataset.hpp"
#include "hocl/grid.hpp"
#include "hocl/model.hpp"
#include "hocl/types.hpp"

namespace hocl {

/// Full problem definition shared by every solver.
///
/// gamma1/gamma2 weight the augmented-Hamiltonian proximal terms; the plain
/// gradient-correction step sizes of the baseline solver live in
/// SolverOptions instead.
struct ProblemSpec {
  ModelSpec model;
  Dataset train_set;   // drives the state dynamics
  Dataset valid_set;   // drives the terminal map phi
  Vector theta0;
  double T = 1.0;
  int N = 100;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double u_max = 1.0;
  ControlPartition partition;
  double z_target = 0.0;
  double eps_tol = 1e-6;

  int param_dim() const { return model.param_dim; }

  TimeGrid grid() const { return TimeGrid(T, N); }

  void validate() const {
    train_set.validate();
    valid_set.validate();
    require(train_set.feature_dim() == valid_set.feature_dim(),
            "train and validation sets must share a feature dimension");
    model.validate(train_set.feature_dim());
    const int p = model.param_dim;
    require(theta0.size() == p, "theta0 must have length param_dim");
    require(theta0.allFinite(), "theta0 must be finite");
    require(T > 0.0, "T must be positive");
    require(N >= 1, "N must be positive");
    require(alpha > 0.0, "alpha must be strictly positive");
    require(beta > 0.0, "beta must be strictly positive");
    require(gamma1 >= 0.0 && gamma1 < 1.0, "gamma1 must lie in [0,1)");
    require(gamma2 >= 0.0 && gamma2 < 1.0, "gamma2 must lie in [0,1)");
    require(u_max > 0.0, "u_max must be positive");
    require(eps_tol > 0.0, "eps_tol must be positive");
    partition.validate_cover(p);
    require(!partition.leader_idx.empty(), "leader coordinate set is empty");
    if (p > 1)
      require(!partition.follower_idx.empty(),
              "follower coordinate set is empty");
  }
};

}  // namespace hocl
