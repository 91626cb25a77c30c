#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace hocl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Agent { leader, follower };

inline const char* agent_name(Agent a) {
  return a == Agent::leader ? "leader" : "follower";
}

/// Componentwise projection onto the box [-bound, bound].
inline double clamp_box(double x, double bound) {
  if (x > bound) return bound;
  if (x < -bound) return -bound;
  return x;
}

inline Vector clamp_box(const Vector& x, double bound) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = clamp_box(x[i], bound);
  return out;
}

/// Zero every coordinate not listed in idx.
inline Vector masked(const Vector& x, const std::vector<int>& idx) {
  Vector out = Vector::Zero(x.size());
  for (int i : idx) out[i] = x[i];
  return out;
}

inline bool is_masked_to(const Vector& x, const std::vector<int>& idx) {
  Vector keep = Vector::Zero(x.size());
  for (int i : idx) keep[i] = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (keep[i] == 0.0 && x[i] != 0.0) return false;
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hocl
