#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hocl/config.hpp"
#include "hocl/instances.hpp"
#include "hocl/oracle.hpp"
#include "hocl/report.hpp"
#include "hocl/solver_baseline.hpp"
#include "hocl/solver_msa.hpp"
#include "hocl/solver_parareal.hpp"

namespace hocl {

/// Worker-count precedence: HOCL_WORKERS env var, then the explicit
/// override (CLI flag), then the config value.
inline int resolve_workers(int config_workers, std::optional<int> flag) {
  if (const char* env = std::getenv("HOCL_WORKERS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw std::runtime_error("HOCL_WORKERS must be an integer");
    }
  }
  if (flag.has_value()) return *flag;
  return config_workers;
}

struct GenDataConfig {
  int d = 2;
  int m0 = 100;
  Vector theta_true;
  double noise = 0.0;
  int m1 = 50;
  int m2 = 50;
  bool with_replacement = false;
  std::uint64_t seed = 0;
};

inline GenDataConfig parse_gen_config(const nlohmann::json& j) {
  GenDataConfig g;
  g.d = j.at("d").get<int>();
  g.m0 = j.at("m0").get<int>();
  g.theta_true = detail::json_to_vector(j.at("theta_true"));
  g.noise = j.value("noise", 0.0);
  g.m1 = j.at("m1").get<int>();
  g.m2 = j.at("m2").get<int>();
  g.with_replacement = j.value("with_replacement", false);
  g.seed = j.value("seed", static_cast<std::uint64_t>(0));
  require(g.d >= 1 && g.m0 >= 1, "generator needs d >= 1 and m0 >= 1");
  require(g.theta_true.size() == g.d, "theta_true must have length d");
  require(g.noise >= 0.0, "noise must be nonnegative");
  return g;
}

/// Synthesize a linear dataset and its bootstrap splits. Draw order from
/// SplitMix64(seed): per row, d uniform01 draws mapped to [-1,1] for the
/// features, then one normal() draw scaled by the noise level for the label;
/// after all rows, one next() draw seeds the bootstrap split.
inline void cmd_gen_data(const GenDataConfig& g,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  SplitMix64 rng(g.seed);
  Dataset z0;
  z0.features.resize(g.m0, g.d);
  z0.labels.resize(g.m0);
  for (int i = 0; i < g.m0; ++i) {
    for (int c = 0; c < g.d; ++c)
      z0.features(i, c) = 2.0 * rng.uniform01() - 1.0;
    double label = z0.features.row(i).dot(g.theta_true);
    if (g.noise > 0.0)
      label += g.noise * rng.normal();
    else
      rng.normal();  // keep the stream position independent of the level
    z0.labels[i] = label;
  }
  const std::uint64_t split_seed = rng.next();
  auto [z1, z2] =
      bootstrap_split(z0, g.m1, g.m2, split_seed, g.with_replacement);
  save_dataset_csv(z0, out_dir / "z0.csv");
  save_dataset_csv(z1, out_dir / "z1.csv");
  save_dataset_csv(z2, out_dir / "z2.csv");
}

/// Run the configured solver and write result.json plus trace.csv.
/// Returns 0 on convergence, 2 when the iteration budget ran out.
inline int cmd_solve(RunConfig cfg, const std::filesystem::path& out_dir,
                     const std::optional<std::string>& algorithm_override = {},
                     std::optional<int> workers_override = {}) {
  if (algorithm_override) cfg.algorithm = *algorithm_override;
  cfg.opts.workers = resolve_workers(cfg.opts.workers, workers_override);
  std::filesystem::create_directories(out_dir);

  SolveReport rep;
  if (cfg.algorithm == "baseline")
    rep = run_algorithm_o(cfg.prob, cfg.opts);
  else if (cfg.algorithm == "msa")
    rep = run_algorithm_1(cfg.prob, cfg.opts);
  else if (cfg.algorithm == "parallel")
    rep = run_algorithm_2(cfg.prob, cfg.opts);
  else
    throw std::runtime_error("unknown algorithm: " + cfg.algorithm);

  write_result_json(rep, out_dir / "result.json");
  write_trace_csv(rep, out_dir / "trace.csv");
  std::cerr << "[" << rep.algorithm << "] "
            << (rep.converged ? "converged" : "budget exhausted") << " after "
            << rep.outer_iters << " outer iterations, phi_gap=" << rep.phi_gap
            << ", wall=" << rep.wall_time_s << "s\n";
  return rep.converged ? 0 : 2;
}

struct GradientCheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool less_equal = true;
  bool passed = false;
};

namespace detail {

inline ControlTrajectory seeded_control(const TimeGrid& grid, Agent agent,
                                        const ProblemSpec& prob,
                                        std::uint64_t seed) {
  SplitMix64 rng(seed);
  auto u = ControlTrajectory::zeros(grid, agent, prob.param_dim());
  for (int k = 0; k < grid.N; ++k)
    for (int i : prob.partition.coords(agent))
      u.values[k][i] = 0.5 * prob.u_max * (2.0 * rng.uniform01() - 1.0);
  return u;
}

inline double max_node_rel_error(const std::vector<Vector>& a,
                                 const std::vector<Vector>& b,
                                 const std::vector<int>& coords) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double diff = 0.0, ref = 0.0;
    for (int i : coords) {
      diff += (a[k][i] - b[k][i]) * (a[k][i] - b[k][i]);
      ref += b[k][i] * b[k][i];
    }
    const double denom = std::max(std::sqrt(ref), 1e-8);
    worst = std::max(worst, std::sqrt(diff) / denom);
  }
  return worst;
}

}  // namespace detail

/// Adjoint-vs-finite-difference checks plus one descent probe per agent.
/// Thresholds: relative error 1e-5 for the gradient matches; the cost after
/// one correction step must not exceed the cost before it by more than
/// 1e-12.
inline std::vector<GradientCheckRow> run_gradient_checks(
    const ProblemSpec& prob, const SolverOptions& opts) {
  prob.validate();
  require(prob.param_dim() <= 8 && prob.N <= 200,
          "scale: gradient checks support p <= 8 and N <= 200");
  const BoundModel train(prob.model, prob.train_set);
  const BoundModel valid(prob.model, prob.valid_set);
  const TimeGrid grid = prob.grid();
  const double fd_eps = 1e-5;
  const double rel_tol = 1e-5;

  ControlTrajectory u1 =
      detail::seeded_control(grid, Agent::leader, prob, opts.seed + 1);
  ControlTrajectory u2 =
      detail::seeded_control(grid, Agent::follower, prob, opts.seed + 2);

  std::vector<GradientCheckRow> rows;
  StateTrajectory theta = integrate_forward(prob.theta0, u1, u2, grid, train);

  {
    auto adj = follower_cost_gradient(theta, u2, prob, train);
    TranscriptionObjective obj(Agent::follower, prob, grid, u1);
    auto fd = fd_gradient([&](const ControlTrajectory& v) { return obj(v); },
                          u2, prob.partition.follower_idx, fd_eps);
    const double err =
        detail::max_node_rel_error(adj, fd, prob.partition.follower_idx);
    rows.push_back({"follower adjoint gradient vs fd (max rel)", err, rel_tol,
                    true, err <= rel_tol});
  }
  {
    auto adj = leader_cost_gradient(theta, prob, train, valid);
    TranscriptionObjective obj(Agent::leader, prob, grid, u2);
    auto fd = fd_gradient([&](const ControlTrajectory& v) { return obj(v); },
                          u1, prob.partition.leader_idx, fd_eps);
    const double err =
        detail::max_node_rel_error(adj, fd, prob.partition.leader_idx);
    rows.push_back({"leader adjoint gradient vs fd (max rel)", err, rel_tol,
                    true, err <= rel_tol});
  }
  {
    AdjointTrajectory p2 =
        descent_costate(Agent::follower, theta, u2, grid, prob, train, valid);
    TranscriptionObjective obj(Agent::follower, prob, grid, u1);
    const double before = obj(u2);
    ControlTrajectory stepped = follower_gradient_step(
        u2, p2, opts.step_gamma2, prob, opts.update_sign);
    const double change = obj(stepped) - before;
    rows.push_back({"follower correction step descent (dJ2)", change, 1e-12,
                    true, change <= 1e-12});
  }
  {
    AdjointTrajectory p1 =
        descent_costate(Agent::leader, theta, u2, grid, prob, train, valid);
    TranscriptionObjective obj(Agent::leader, prob, grid, u2);
    const double before = obj(u1);
    ControlTrajectory stepped =
        leader_gradient_step(u1, p1, opts.step_gamma1, prob, opts.update_sign);
    const double change = obj(stepped) - before;
    rows.push_back({"leader correction step descent (dJ1+phi)", change, 1e-12,
                    true, change <= 1e-12});
  }
  return rows;
}

inline int cmd_check_gradients(const ProblemSpec& prob,
                               const SolverOptions& opts,
                               std::ostream& out = std::cout) {
  auto rows = run_gradient_checks(prob, opts);
  bool all = true;
  out << "check                                        value        threshold    status\n";
  for (const auto& r : rows) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-44s %-12.3e %-12.3e %s\n",
                  r.name.c_str(), r.value, r.threshold,
                  r.passed ? "PASS" : "FAIL");
    out << buf;
    all = all && r.passed;
  }
  return all ? 0 : 1;
}

/// Repeat the subinterval phase of the time-parallel solver for each worker
/// count and record wall times. Columns: W, N_c, phase, wall_time_s,
/// speedup_vs_W1 (W=1 is measured as a baseline even when absent from the
/// list). Work per measurement is identical across W.
inline std::filesystem::path cmd_bench(const RunConfig& cfg,
                                       const std::vector<int>& w_list,
                                       const std::filesystem::path& out_dir,
                                       int reps = 3) {
  require(!w_list.empty(), "bench needs at least one worker count");
  for (int w : w_list) require(w >= 1, "worker counts must be >= 1");
  require(cfg.algorithm == "parallel", "bench requires algorithm=parallel");
  const ProblemSpec& prob = cfg.prob;
  prob.validate();

  const BoundModel train(prob.model, prob.train_set);
  const BoundModel valid(prob.model, prob.valid_set);
  const TimeGrid coarse = prob.grid();
  const TimeGrid fine(prob.T, prob.N * cfg.opts.sub_steps);
  const int p = prob.param_dim();

  auto u1 = ControlTrajectory::zeros(fine, Agent::leader, p);
  auto u2 = ControlTrajectory::zeros(fine, Agent::follower, p);
  StateTrajectory theta = integrate_forward(prob.theta0, u1, u2, fine, train);
  AdjointTrajectory p2 =
      integrate_adjoint(Agent::follower, theta, fine, prob, train, valid);
  AdjointTrajectory p1 =
      integrate_descent_adjoint(Agent::leader, theta, fine, prob, train, valid);
  ShootingTrajectory shoot2 = shooting_data(theta, p2, coarse);
  ShootingTrajectory shoot1 = shooting_data(theta, p1, coarse);

  auto time_phase = [&](Agent agent, int workers) {
    const ShootingTrajectory& shoot =
        agent == Agent::follower ? shoot2 : shoot1;
    const ControlTrajectory& other = agent == Agent::follower ? u1 : u2;
    const ControlTrajectory& warm = agent == Agent::follower ? u2 : u1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < reps; ++r) {
      auto phase = detail::run_subinterval_phase(agent, shoot, other, warm,
                                                 prob, cfg.opts, train,
                                                 workers);
      best = std::min(best, phase.wall_s);
    }
    return best;
  };

  const double base_follower = time_phase(Agent::follower, 1);
  const double base_leader = time_phase(Agent::leader, 1);

  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "bench.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(9);
  out << "W,N_c,phase,wall_time_s,speedup_vs_W1\n";
  for (int w : w_list) {
    const double tf = w == 1 ? base_follower : time_phase(Agent::follower, w);
    const double tl = w == 1 ? base_leader : time_phase(Agent::leader, w);
    out << w << "," << prob.N << ",follower," << tf << "," << base_follower / tf
        << "\n";
    out << w << "," << prob.N << ",leader," << tl << "," << base_leader / tl
        << "\n";
  }
  return path;
}

}  // namespace hocl
