#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hocl/options.hpp"
#include "hocl/problem.hpp"

namespace hocl {

struct RunConfig {
  ProblemSpec prob;
  SolverOptions opts;
  std::string algorithm = "msa";  // baseline | msa | parallel
};

namespace detail {

inline Vector json_to_vector(const nlohmann::json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

inline Dataset json_to_dataset(const nlohmann::json& j) {
  Dataset z;
  const auto& rows = j.at("features");
  require(!rows.empty(), "inline dataset needs at least one feature row");
  const std::size_t d = rows[0].size();
  z.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == d, "inline dataset rows must have equal width");
    for (std::size_t c = 0; c < d; ++c)
      z.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c].get<double>();
  }
  z.labels = json_to_vector(j.at("labels"));
  z.validate();
  return z;
}

inline Dataset load_config_dataset(const nlohmann::json& j,
                                   const std::string& inline_key,
                                   const std::string& csv_key,
                                   const std::filesystem::path& base_dir) {
  if (j.contains(inline_key)) return json_to_dataset(j.at(inline_key));
  if (j.contains(csv_key)) {
    std::filesystem::path p = j.at(csv_key).get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p))
      throw std::runtime_error("dataset file not found: " + p.string());
    return load_dataset_csv(p, j.value("csv_has_header", true));
  }
  throw std::runtime_error("config needs either '" + inline_key + "' or '" +
                           csv_key + "'");
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.algorithm = j.value("algorithm", std::string("msa"));
  require(cfg.algorithm == "baseline" || cfg.algorithm == "msa" ||
              cfg.algorithm == "parallel",
          "algorithm must be one of baseline, msa, parallel");

  ProblemSpec& p = cfg.prob;
  p.train_set = detail::load_config_dataset(j, "train", "train_csv", base_dir);
  p.valid_set = detail::load_config_dataset(j, "valid", "valid_csv", base_dir);

  if (j.contains("model")) {
    const auto& m = j.at("model");
    const std::string kind = m.value("kind", std::string("linear"));
    if (kind == "linear") {
      p.model = linear_model(p.train_set.feature_dim());
    } else if (kind == "fixed-basis") {
      p.model = basis_model(m.at("basis").get<std::vector<std::string>>());
    } else {
      throw std::runtime_error("model kind must be linear or fixed-basis");
    }
    if (m.contains("param_dim"))
      require(m.at("param_dim").get<int>() == p.model.param_dim,
              "param_dim inconsistent with model kind");
  } else {
    p.model = linear_model(p.train_set.feature_dim());
  }

  p.theta0 = j.contains("theta0") ? detail::json_to_vector(j.at("theta0"))
                                  : Vector::Zero(p.model.param_dim);
  p.T = j.value("T", 1.0);
  p.N = j.value("N", 100);
  p.alpha = j.value("alpha", 1.0);
  p.beta = j.value("beta", 1.0);
  p.gamma1 = j.value("gamma1", 0.0);
  p.gamma2 = j.value("gamma2", 0.0);
  p.u_max = j.value("u_max", 1.0);
  p.z_target = j.value("z_target", 0.0);
  p.eps_tol = j.value("eps_tol", 1e-6);
  if (j.contains("partition")) {
    p.partition.leader_idx =
        j.at("partition").at("leader").get<std::vector<int>>();
    p.partition.follower_idx =
        j.at("partition").at("follower").get<std::vector<int>>();
  } else {
    p.partition = ControlPartition::first_half_to_leader(p.model.param_dim);
  }

  SolverOptions& o = cfg.opts;
  o.max_outer = j.value("max_outer", o.max_outer);
  o.inner_iters = j.value("inner_iters", o.inner_iters);
  o.step_gamma1 = j.value("step_gamma1", o.step_gamma1);
  o.step_gamma2 = j.value("step_gamma2", o.step_gamma2);
  const std::string sign = j.value("update_sign", std::string("descent"));
  require(sign == "descent" || sign == "ascent",
          "update_sign must be descent or ascent");
  o.update_sign = sign == "descent" ? UpdateSign::descent : UpdateSign::ascent;
  o.sub_steps = j.value("sub_steps", o.sub_steps);
  o.sub_iters = j.value("sub_iters", o.sub_iters);
  o.sub_tol = j.value("sub_tol", o.sub_tol);
  o.lambda = j.value("lambda", o.lambda);
  o.workers = j.value("workers", o.workers);
  o.seed = j.value("seed", static_cast<std::uint64_t>(0));

  p.validate();
  o.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  in >> j;
  return parse_run_config(j, path.parent_path());
}

}  // namespace hocl
