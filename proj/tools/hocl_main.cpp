#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hocl/commands.hpp"

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

std::vector<int> parse_worker_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw std::runtime_error("empty worker list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "hocl: hierarchical optimal-control solvers for point estimation "
      "(baseline sweeps, augmented-Hamiltonian updates, time-parallel "
      "decomposition)"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", algorithm, workers_arg;

  auto* gen = app.add_subcommand("gen-data",
                                 "synthesize a linear dataset and its "
                                 "bootstrap splits (z0/z1/z2 CSV files)");
  gen->add_option("--config", config_path, "generator config JSON")
      ->required();
  gen->add_option("--out", out_dir, "output directory");

  auto* solve =
      app.add_subcommand("solve", "run a solver and write result.json/trace.csv");
  solve->add_option("--config", config_path, "run config JSON")->required();
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--algorithm", algorithm,
                    "override the configured algorithm "
                    "(baseline|msa|parallel)");
  solve->add_option("--workers", workers_arg,
                    "worker threads for the parallel solver");

  auto* check = app.add_subcommand(
      "check-gradients",
      "adjoint-vs-finite-difference table; exits 0 only if all checks pass");
  check->add_option("--config", config_path,
                    "run config JSON (defaults to the built-in reference "
                    "instance)");
  check->add_option("--out", out_dir, "unused; accepted for uniformity");

  auto* bench = app.add_subcommand(
      "bench", "time the subinterval phase across worker counts");
  bench->add_option("--config", config_path, "run config JSON")->required();
  bench->add_option("--out", out_dir, "output directory");
  bench
      ->add_option("--workers", workers_arg,
                   "comma-separated worker counts, e.g. 1,2,4")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      hocl::cmd_gen_data(hocl::parse_gen_config(read_json(config_path)),
                         out_dir);
      return 0;
    }
    if (solve->parsed()) {
      auto cfg = hocl::load_run_config(config_path);
      std::optional<std::string> alg;
      if (!algorithm.empty()) alg = algorithm;
      std::optional<int> workers;
      if (!workers_arg.empty()) workers = std::stoi(workers_arg);
      return hocl::cmd_solve(cfg, out_dir, alg, workers);
    }
    if (check->parsed()) {
      if (config_path.empty()) {
        auto prob = hocl::make_quadratic_instance();
        return hocl::cmd_check_gradients(prob, hocl::SolverOptions{});
      }
      auto cfg = hocl::load_run_config(config_path);
      return hocl::cmd_check_gradients(cfg.prob, cfg.opts);
    }
    if (bench->parsed()) {
      auto cfg = hocl::load_run_config(config_path);
      auto path =
          hocl::cmd_bench(cfg, parse_worker_list(workers_arg), out_dir);
      std::cerr << "bench results written to " << path << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
