#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "hocl/commands.hpp"
#include "support.hpp"

using namespace hocl;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / "hocl_test_cli" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

nlohmann::json reference_config_json(int n = 20) {
  const double s = std::sqrt(2.0);
  nlohmann::json j;
  j["algorithm"] = "msa";
  j["train"] = {{"features", {{s, 0.0}, {0.0, s}}}, {"labels", {s, -s}}};
  j["valid"] = {{"features", {{s, 0.0}, {0.0, s}}},
                {"labels", {0.5 * s, -0.5 * s}}};
  j["theta0"] = {0.0, 0.0};
  j["T"] = 1.0;
  j["N"] = n;
  j["alpha"] = 1.0;
  j["beta"] = 1.0;
  j["gamma1"] = 0.5;
  j["gamma2"] = 0.5;
  j["u_max"] = 2.0;
  j["z_target"] = 0.0;
  j["eps_tol"] = 1e-6;
  j["max_outer"] = 100;
  return j;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("HOCL_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("gen-data writes deterministic splits that a linear model explains") {
  GenDataConfig g;
  g.d = 3;
  g.m0 = 100;
  g.theta_true = (Vector(3) << 0.5, -1.0, 2.0).finished();
  g.noise = 0.0;
  g.m1 = 50;
  g.m2 = 50;
  g.with_replacement = false;
  g.seed = 42;

  auto dir = fresh_dir("gen");
  cmd_gen_data(g, dir);

  for (const char* name : {"z0.csv", "z1.csv", "z2.csv"}) {
    Dataset z = load_dataset_csv(dir / name, true);
    REQUIRE(loss_j0(linear_model(3), g.theta_true, z) <= 1e-24);
  }

  SECTION("same seed reproduces the files byte for byte") {
    auto dir2 = fresh_dir("gen_again");
    cmd_gen_data(g, dir2);
    for (const char* name : {"z0.csv", "z1.csv", "z2.csv"})
      REQUIRE(slurp(dir / name) == slurp(dir2 / name));
  }

  SECTION("the two splits are disjoint and cover every source row") {
    Dataset z0 = load_dataset_csv(dir / "z0.csv", true);
    Dataset z1 = load_dataset_csv(dir / "z1.csv", true);
    Dataset z2 = load_dataset_csv(dir / "z2.csv", true);
    REQUIRE(z1.size() + z2.size() == z0.size());
    std::multiset<double> expected, seen;
    for (int i = 0; i < z0.size(); ++i) expected.insert(z0.labels[i]);
    for (int i = 0; i < z1.size(); ++i) seen.insert(z1.labels[i]);
    for (int i = 0; i < z2.size(); ++i) seen.insert(z2.labels[i]);
    REQUIRE(seen == expected);
  }

  SECTION("noisy labels differ from the clean ones but reuse the features") {
    GenDataConfig noisy = g;
    noisy.noise = 0.1;
    auto dir3 = fresh_dir("gen_noisy");
    cmd_gen_data(noisy, dir3);
    Dataset clean = load_dataset_csv(dir / "z0.csv", true);
    Dataset jittered = load_dataset_csv(dir3 / "z0.csv", true);
    REQUIRE(clean.features == jittered.features);
    REQUIRE(clean.labels != jittered.labels);
  }
}

TEST_CASE("solve command: exit codes, determinism, and file schemas") {
  auto base = reference_config_json();

  SECTION("a huge tolerance converges in one outer iteration with exit 0") {
    auto j = base;
    j["eps_tol"] = 1e9;
    auto cfg = parse_run_config(j, ".");
    auto dir = fresh_dir("solve_easy");
    REQUIRE(cmd_solve(cfg, dir) == 0);
    auto result = nlohmann::json::parse(slurp(dir / "result.json"));
    REQUIRE(result["converged"] == true);
    REQUIRE(result["outer_iters"] == 1);
    REQUIRE(result["schema_version"] == kReportSchemaVersion);
    REQUIRE(result.contains("residual_history"));
    REQUIRE(result["seed"] == 0);
  }

  SECTION("budget exhaustion exits 2 but still writes the report") {
    auto j = base;
    j["max_outer"] = 3;
    auto cfg = parse_run_config(j, ".");
    auto dir = fresh_dir("solve_budget");
    REQUIRE(cmd_solve(cfg, dir) == 2);
    auto result = nlohmann::json::parse(slurp(dir / "result.json"));
    REQUIRE(result["converged"] == false);

    std::ifstream trace(dir / "trace.csv");
    std::string header;
    std::getline(trace, header);
    REQUIRE(header ==
            "iter,J1,J2,leader_residual,follower_residual,phi_gap,wall_s");
    REQUIRE(count_lines(dir / "trace.csv") == 4);  // header + 3 iterations
  }

  SECTION("identical configs give identical reports modulo timing") {
    auto cfg = parse_run_config(base, ".");
    auto dir_a = fresh_dir("solve_a");
    auto dir_b = fresh_dir("solve_b");
    cmd_solve(cfg, dir_a);
    cmd_solve(cfg, dir_b);
    auto a = strip_timing(nlohmann::json::parse(slurp(dir_a / "result.json")));
    auto b = strip_timing(nlohmann::json::parse(slurp(dir_b / "result.json")));
    REQUIRE(a == b);
  }

  SECTION("worker count comes from the environment over config") {
    auto j = base;
    j["algorithm"] = "parallel";
    j["N"] = 8;
    j["sub_steps"] = 8;
    j["max_outer"] = 10;
    j["workers"] = 1;
    auto cfg = parse_run_config(j, ".");

    auto dir_w1 = fresh_dir("solve_w1");
    cmd_solve(cfg, dir_w1);

    setenv("HOCL_WORKERS", "4", 1);
    auto dir_env = fresh_dir("solve_env");
    cmd_solve(cfg, dir_env);
    unsetenv("HOCL_WORKERS");

    auto a = strip_timing(nlohmann::json::parse(slurp(dir_w1 / "result.json")));
    auto b = strip_timing(nlohmann::json::parse(slurp(dir_env / "result.json")));
    REQUIRE(a == b);

    setenv("HOCL_WORKERS", "notanumber", 1);
    REQUIRE_THROWS(cmd_solve(cfg, fresh_dir("solve_bad_env")));
    unsetenv("HOCL_WORKERS");
  }

  SECTION("fixed-basis models run end to end through the config") {
    nlohmann::json j;
    j["algorithm"] = "msa";
    j["model"] = {{"kind", "fixed-basis"}, {"basis", {"1", "x0", "x0^2"}}};
    j["train"] = {{"features", {{0.2}, {-0.5}, {1.0}, {0.7}}},
                  {"labels", {1.1, 0.4, 2.0, 1.6}}};
    j["valid"] = {{"features", {{0.1}, {0.9}}}, {"labels", {1.0, 1.9}}};
    j["theta0"] = {0.0, 0.0, 0.0};
    j["N"] = 12;
    j["alpha"] = 1.0;
    j["beta"] = 1.0;
    j["gamma1"] = 0.5;
    j["gamma2"] = 0.5;
    j["u_max"] = 1.0;
    j["max_outer"] = 50;
    auto cfg = parse_run_config(j, ".");
    REQUIRE(cfg.prob.param_dim() == 3);
    auto dir = fresh_dir("solve_basis");
    const int code = cmd_solve(cfg, dir);
    REQUIRE((code == 0 || code == 2));
    auto result = nlohmann::json::parse(slurp(dir / "result.json"));
    REQUIRE(result["theta_final"].size() == 3);
  }

  SECTION("datasets can come from csv files resolved against the config") {
    GenDataConfig g;
    g.d = 2;
    g.m0 = 40;
    g.theta_true = (Vector(2) << 1.0, -1.0).finished();
    g.m1 = 20;
    g.m2 = 20;
    g.seed = 5;
    auto dir = fresh_dir("solve_csv");
    cmd_gen_data(g, dir);

    nlohmann::json j;
    j["algorithm"] = "baseline";
    j["train_csv"] = "z1.csv";
    j["valid_csv"] = "z2.csv";
    j["N"] = 10;
    j["u_max"] = 1.0;
    j["eps_tol"] = 1e9;
    std::ofstream(dir / "run.json") << j.dump(2);
    auto cfg = load_run_config(dir / "run.json");
    REQUIRE(cfg.prob.train_set.size() == 20);
    REQUIRE(cmd_solve(cfg, dir) == 0);

    nlohmann::json missing = j;
    missing["train_csv"] = "nope.csv";
    std::ofstream(dir / "bad.json") << missing.dump(2);
    REQUIRE_THROWS(load_run_config(dir / "bad.json"));
  }
}

TEST_CASE("gradient checks pass on the reference instance and catch sign bugs") {
  ProblemSpec prob = make_quadratic_instance();
  SolverOptions opts;
  std::ostringstream sink;
  REQUIRE(cmd_check_gradients(prob, opts, sink) == 0);

  SECTION("ascent updates fail the descent probes") {
    SolverOptions bad = opts;
    bad.update_sign = UpdateSign::ascent;
    std::ostringstream sink2;
    REQUIRE(cmd_check_gradients(prob, bad, sink2) == 1);
    REQUIRE(sink2.str().find("FAIL") != std::string::npos);
  }

  SECTION("the single-parameter minimal instance runs and passes") {
    QuadraticInstanceConfig cfg;
    cfg.theta_star_train = Vector::Constant(1, 1.0);
    cfg.theta_star_valid = Vector::Constant(1, 0.5);
    cfg.theta0 = Vector::Zero(1);
    cfg.N = 2;
    ProblemSpec tiny = make_quadratic_instance(cfg);
    std::ostringstream sink3;
    REQUIRE(cmd_check_gradients(tiny, SolverOptions{}, sink3) == 0);
  }

  SECTION("oversized instances are rejected") {
    ProblemSpec big = make_quadratic_instance();
    big.N = 300;
    REQUIRE_THROWS_WITH(run_gradient_checks(big, SolverOptions{}),
                        Catch::Matchers::ContainsSubstring("scale"));
  }
}

TEST_CASE("bench command emits the documented csv") {
  auto j = reference_config_json(8);
  j["algorithm"] = "parallel";
  j["sub_steps"] = 8;
  auto cfg = parse_run_config(j, ".");
  auto dir = fresh_dir("bench");

  SECTION("single worker count: unit speedups, fixed row count") {
    auto path = cmd_bench(cfg, {1}, dir, 1);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "W,N_c,phase,wall_time_s,speedup_vs_W1");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
      ++rows;
      std::stringstream ss(line);
      std::string w, nc, phase, wall, speedup;
      std::getline(ss, w, ',');
      std::getline(ss, nc, ',');
      std::getline(ss, phase, ',');
      std::getline(ss, wall, ',');
      std::getline(ss, speedup, ',');
      REQUIRE(w == "1");
      REQUIRE(nc == "8");
      REQUIRE(std::stod(speedup) == 1.0);
      REQUIRE(std::stod(wall) > 0.0);
    }
    REQUIRE(rows == 2);  // |W_list| x {follower, leader}
  }

  SECTION("row count scales with the worker list") {
    auto path = cmd_bench(cfg, {1, 2}, dir, 1);
    REQUIRE(count_lines(path) == 1 + 2 * 2);
  }

  SECTION("invalid worker counts and algorithms are rejected") {
    REQUIRE_THROWS(cmd_bench(cfg, {0}, dir, 1));
    auto wrong = cfg;
    wrong.algorithm = "msa";
    REQUIRE_THROWS(cmd_bench(wrong, {1}, dir, 1));
  }
}

TEST_CASE("command-line binary end to end") {
  auto dir = fresh_dir("binary");

  nlohmann::json gen;
  gen["d"] = 2;
  gen["m0"] = 30;
  gen["theta_true"] = {1.0, -0.5};
  gen["noise"] = 0.0;
  gen["m1"] = 15;
  gen["m2"] = 15;
  gen["seed"] = 11;
  std::ofstream(dir / "gen.json") << gen.dump(2);
  REQUIRE(run_cli("gen-data --config " + (dir / "gen.json").string() +
                  " --out " + dir.string()) == 0);
  REQUIRE(std::filesystem::exists(dir / "z1.csv"));

  auto run = reference_config_json(10);
  run["eps_tol"] = 1e9;
  std::ofstream(dir / "run.json") << run.dump(2);
  REQUIRE(run_cli("solve --config " + (dir / "run.json").string() + " --out " +
                  (dir / "out").string()) == 0);
  REQUIRE(std::filesystem::exists(dir / "out" / "result.json"));
  REQUIRE(std::filesystem::exists(dir / "out" / "trace.csv"));

  // Algorithm override via flag: budget exhaustion maps to exit 2.
  auto hard = reference_config_json(10);
  hard["max_outer"] = 2;
  std::ofstream(dir / "hard.json") << hard.dump(2);
  REQUIRE(run_cli("solve --config " + (dir / "hard.json").string() +
                  " --algorithm baseline --out " + (dir / "out2").string()) ==
          2);

  REQUIRE(run_cli("check-gradients") == 0);

  auto bench = reference_config_json(8);
  bench["algorithm"] = "parallel";
  bench["sub_steps"] = 8;
  std::ofstream(dir / "bench.json") << bench.dump(2);
  REQUIRE(run_cli("bench --config " + (dir / "bench.json").string() +
                  " --workers 1 --out " + (dir / "bench_out").string()) == 0);
  REQUIRE(std::filesystem::exists(dir / "bench_out" / "bench.csv"));

  // Config errors exit 1.
  REQUIRE(run_cli("solve --config " + (dir / "absent.json").string() +
                  " --out " + dir.string()) == 1);
}
