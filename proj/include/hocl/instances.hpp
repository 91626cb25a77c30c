#pragma once

#include <cmath>

#include "hocl/problem.hpp"

namespace hocl {

/// Dataset whose normalized Gram matrix is the identity: p rows with
/// features sqrt(p)*I_p and labels sqrt(p)*theta_star. The training gradient
/// is then exactly theta - theta_star and the Hessian-vector product is the
/// identity, which the closed-form flow oracle relies on.
inline Dataset unit_gram_dataset(const Vector& theta_star) {
  const int p = static_cast<int>(theta_star.size());
  const double s = std::sqrt(static_cast<double>(p));
  Dataset z;
  z.features = s * Matrix::Identity(p, p);
  z.labels = s * theta_star;
  return z;
}

struct QuadraticInstanceConfig {
  Vector theta_star_train = (Vector(2) << 1.0, -1.0).finished();
  Vector theta_star_valid = (Vector(2) << 0.5, -0.5).finished();
  Vector theta0 = Vector::Zero(2);
  double T = 1.0;
  int N = 50;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma1 = 0.9;
  double gamma2 = 0.5;
  double u_max = 2.0;
  double z_target = 0.0;
  double eps_tol = 1e-6;
};

/// The strictly convex reference instance used by the verification commands
/// and the test suites: unit-Gram train/validation sets, so every piece has
/// a closed form or a cheap independent oracle.
inline ProblemSpec make_quadratic_instance(
    const QuadraticInstanceConfig& cfg = {}) {
  const int p = static_cast<int>(cfg.theta_star_train.size());
  ProblemSpec prob;
  prob.model = linear_model(p);
  prob.train_set = unit_gram_dataset(cfg.theta_star_train);
  prob.valid_set = unit_gram_dataset(cfg.theta_star_valid);
  prob.theta0 = cfg.theta0;
  prob.T = cfg.T;
  prob.N = cfg.N;
  prob.alpha = cfg.alpha;
  prob.beta = cfg.beta;
  prob.gamma1 = cfg.gamma1;
  prob.gamma2 = cfg.gamma2;
  prob.u_max = cfg.u_max;
  prob.partition = ControlPartition::first_half_to_leader(p);
  prob.z_target = cfg.z_target;
  prob.eps_tol = cfg.eps_tol;
  return prob;
}

/// Larger instance for the worker-scaling benchmark: p parameters, N coarse
/// subintervals.
inline ProblemSpec make_bench_instance(int p = 8, int n_coarse = 64) {
  QuadraticInstanceConfig cfg;
  cfg.theta_star_train = Vector::LinSpaced(p, 1.0, -1.0);
  cfg.theta_star_valid = 0.5 * cfg.theta_star_train;
  cfg.theta0 = Vector::Zero(p);
  cfg.N = n_coarse;
  return make_quadratic_instance(cfg);
}

}  // namespace hocl
