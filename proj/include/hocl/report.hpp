#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hocl/trajectory.hpp"
#include "hocl/types.hpp"

namespace hocl {

inline constexpr int kReportSchemaVersion = 1;

struct HistoryRow {
  int iter = 0;
  double leader_residual = 0.0;
  double follower_residual = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
  double phi_gap = 0.0;
  double wall_s = 0.0;
  // Unprojected gradient norms, kept for diagnostics.
  double leader_grad_raw = 0.0;
  double follower_grad_raw = 0.0;
};

struct SolveReport {
  std::string algorithm;
  Vector theta_final;
  double j1 = 0.0;
  double j2 = 0.0;
  double phi_gap = 0.0;  // phi(theta(T)) - z_target
  bool converged = false;
  int outer_iters = 0;
  std::vector<HistoryRow> history;
  double wall_time_s = 0.0;
  std::map<std::string, double> per_phase_time_s;
  std::map<std::string, double> diagnostics;
  std::uint64_t seed = 0;
  // Final control iterates; kept in memory for cross-checks, not serialized.
  ControlTrajectory u1_final, u2_final;
};

inline nlohmann::json to_json(const SolveReport& r) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["algorithm"] = r.algorithm;
  j["theta_final"] = std::vector<double>(r.theta_final.begin(), r.theta_final.end());
  j["J1"] = r.j1;
  j["J2"] = r.j2;
  j["phi_gap"] = r.phi_gap;
  j["converged"] = r.converged;
  j["outer_iters"] = r.outer_iters;
  j["seed"] = r.seed;
  j["residual_history"] = nlohmann::json::array();
  for (const auto& h : r.history) {
    nlohmann::json row;
    row["iter"] = h.iter;
    row["leader_residual"] = h.leader_residual;
    row["follower_residual"] = h.follower_residual;
    row["J1"] = h.j1;
    row["J2"] = h.j2;
    row["phi_gap"] = h.phi_gap;
    row["wall_s"] = h.wall_s;
    row["leader_grad_raw"] = h.leader_grad_raw;
    row["follower_grad_raw"] = h.follower_grad_raw;
    j["residual_history"].push_back(row);
  }
  j["diagnostics"] = r.diagnostics;
  j["wall_time_s"] = r.wall_time_s;
  j["per_phase_time_s"] = r.per_phase_time_s;
  return j;
}

/// Strip the fields that legitimately vary between runs of the same
/// configuration (timings only), for determinism comparisons.
inline nlohmann::json strip_timing(nlohmann::json j) {
  j.erase("wall_time_s");
  j.erase("per_phase_time_s");
  if (j.contains("residual_history"))
    for (auto& row : j["residual_history"]) row.erase("wall_s");
  return j;
}

inline void write_result_json(const SolveReport& r,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(r).dump(2) << "\n";
}

/// Fixed column order consumed by downstream tooling.
inline void write_trace_csv(const SolveReport& r,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "iter,J1,J2,leader_residual,follower_residual,phi_gap,wall_s\n";
  for (const auto& h : r.history)
    out << h.iter << "," << h.j1 << "," << h.j2 << "," << h.leader_residual
        << "," << h.follower_residual << "," << h.phi_gap << "," << h.wall_s
        << "\n";
}

}  // namespace hocl
