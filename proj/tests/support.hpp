#pragma once

#include <functional>

#include "hocl/instances.hpp"
#include "hocl/rng.hpp"
#include "hocl/types.hpp"

namespace hocl::testing {

/// Central finite differences of a scalar function of a parameter vector.
inline Vector fd_param_gradient(const std::function<double(const Vector&)>& f,
                                const Vector& theta, double eps = 1e-6) {
  Vector g(theta.size());
  Vector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double up = f(probe);
    probe[i] = saved - eps;
    const double down = f(probe);
    probe[i] = saved;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

inline Vector random_vector(SplitMix64& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * (2.0 * rng.uniform01() - 1.0);
  return v;
}

/// Small dense random regression dataset.
inline Dataset random_dataset(SplitMix64& rng, int m, int d) {
  Dataset z;
  z.features.resize(m, d);
  z.labels.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j)
      z.features(i, j) = 2.0 * rng.uniform01() - 1.0;
    z.labels[i] = 2.0 * rng.uniform01() - 1.0;
  }
  return z;
}

inline double rel_error(double got, double want, double floor = 1e-12) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

inline double rel_error(const Vector& got, const Vector& want,
                        double floor = 1e-12) {
  return (got - want).norm() / std::max(want.norm(), floor);
}

}  // namespace hocl::testing
