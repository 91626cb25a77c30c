#pragma once

#include <cstdint>
#include <functional>

#include "hocl/types.hpp"

namespace hocl {

/// Direction of the gradient-correction updates in the baseline solver.
/// descent steps against dH/du (the convention consistent with minimizing
/// the costs); ascent steps along it and exists for diagnostics.
enum class UpdateSign { descent, ascent };

struct SolverOptions {
  int max_outer = 500;
  // Follower response loop: forward/backward sweeps plus control update,
  // repeated until the follower residual drops below eps_tol/10 or this many
  // sweeps have run, before each leader update.
  int inner_iters = 20;
  // Correction step sizes for the baseline gradient updates, in (0, 1].
  double step_gamma1 = 0.2;
  double step_gamma2 = 0.2;
  UpdateSign update_sign = UpdateSign::descent;

  // Time-parallel solver: fine steps per subinterval, projected-gradient
  // budget and tolerance per subinterval, leader terminal penalty weight.
  int sub_steps = 16;
  int sub_iters = 50;
  double sub_tol = 1e-8;
  double lambda = 1.0;
  // Worker threads for the subinterval phase; 0 picks the hardware count.
  int workers = 1;

  // Echoed into reports so runs are attributable to their seed.
  std::uint64_t seed = 0;

  // Test hook: called with (outer, sweep, J2 after the update) after every
  // follower control update. Costs one extra forward sweep per call.
  std::function<void(int, int, double)> follower_sweep_observer;
  // Test hook: when true, each Segment records its subcost after every
  // projected-gradient iteration.
  bool record_subcost_history = false;

  void validate() const {
    require(max_outer >= 1, "max_outer must be positive");
    require(inner_iters >= 1, "inner_iters must be positive");
    require(step_gamma1 > 0.0 && step_gamma1 <= 1.0,
            "step_gamma1 must lie in (0,1]");
    require(step_gamma2 > 0.0 && step_gamma2 <= 1.0,
            "step_gamma2 must lie in (0,1]");
    require(sub_steps >= 1, "sub_steps must be positive");
    require(sub_iters >= 0, "sub_iters must be nonnegative");
    require(sub_tol > 0.0, "sub_tol must be positive");
    require(lambda >= 0.0, "lambda must be nonnegative");
    require(workers >= 0, "workers must be nonnegative");
  }
};

}  // namespace hocl
