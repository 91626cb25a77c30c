#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hocl/dataset.hpp"
#include "hocl/types.hpp"

namespace hocl {

enum class ModelKind { linear, fixed_basis };

/// Hypothesis class: models linear in the parameters, h_theta(x) = <phi(x), theta>.
/// kind=linear uses the raw features (p = d); kind=fixed_basis maps each
/// feature row through a list of basis functions (p = basis.size()).
///
/// Basis identifiers:
///   "1"        constant one
///   "xK"       feature K
///   "xK^2"     feature K squared
///   "xK*xL"    product of features K and L
///   "sin(xK)"  / "cos(xK)"
struct ModelSpec {
  ModelKind kind = ModelKind::linear;
  std::vector<std::string> basis;
  int param_dim = 0;

  void validate(int feature_dim) const {
    require(param_dim >= 1, "param_dim must be positive");
    if (kind == ModelKind::linear) {
      require(param_dim == feature_dim,
              "linear model requires param_dim == feature dimension");
      require(basis.empty(), "linear model takes no basis list");
    } else {
      require(param_dim == static_cast<int>(basis.size()),
              "fixed-basis model requires param_dim == number of basis functions");
    }
  }
};

inline ModelSpec linear_model(int d) {
  return ModelSpec{ModelKind::linear, {}, d};
}

inline ModelSpec basis_model(std::vector<std::string> basis) {
  const int p = static_cast<int>(basis.size());
  return ModelSpec{ModelKind::fixed_basis, std::move(basis), p};
}

namespace detail {

inline int parse_feature_index(const std::string& tok, int d,
                               const std::string& whole) {
  if (tok.size() < 2 || tok[0] != 'x')
    throw std::invalid_argument("bad basis identifier: " + whole);
  int k = 0;
  try {
    k = std::stoi(tok.substr(1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad basis identifier: " + whole);
  }
  if (k < 0 || k >= d)
    throw std::invalid_argument("basis identifier '" + whole +
                                "' references feature out of range");
  return k;
}

inline double eval_basis(const std::string& id, const Eigen::RowVectorXd& x) {
  const int d = static_cast<int>(x.size());
  if (id == "1") return 1.0;
  auto caret = id.find('^');
  auto star = id.find('*');
  if (id.rfind("sin(", 0) == 0 && id.back() == ')')
    return std::sin(x[parse_feature_index(id.substr(4, id.size() - 5), d, id)]);
  if (id.rfind("cos(", 0) == 0 && id.back() == ')')
    return std::cos(x[parse_feature_index(id.substr(4, id.size() - 5), d, id)]);
  if (caret != std::string::npos) {
    if (id.substr(caret + 1) != "2")
      throw std::invalid_argument("only power 2 supported in basis id: " + id);
    double v = x[parse_feature_index(id.substr(0, caret), d, id)];
    return v * v;
  }
  if (star != std::string::npos) {
    double a = x[parse_feature_index(id.substr(0, star), d, id)];
    double b = x[parse_feature_index(id.substr(star + 1), d, id)];
    return a * b;
  }
  return x[parse_feature_index(id, d, id)];
}

}  // namespace detail

/// m x p design matrix for the model on the given feature rows.
inline Matrix design_matrix(const ModelSpec& model, const Matrix& features) {
  if (model.kind == ModelKind::linear) return features;
  Matrix phi(features.rows(), model.param_dim);
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    for (int j = 0; j < model.param_dim; ++j)
      phi(i, j) = detail::eval_basis(model.basis[j], features.row(i));
  return phi;
}

/// A model evaluated against a fixed dataset, with the design matrix and the
/// Gram factors precomputed. All derivative formulas below are exact for this
/// model class:
///   loss(theta) = (1/2m) ||Phi theta - y||^2
///   grad(theta) = gram * theta - xty           (gram = Phi^T Phi / m)
///   hvp(v)      = gram * v
class BoundModel {
 public:
  BoundModel(const ModelSpec& model, const Dataset& z) {
    z.validate();
    model.validate(z.feature_dim());
    phi_ = design_matrix(model, z.features);
    y_ = z.labels;
    const double m = static_cast<double>(z.size());
    gram_ = (phi_.transpose() * phi_) / m;
    xty_ = phi_.transpose() * y_ / m;
    inv_m_ = 1.0 / m;
  }

  int param_dim() const { return static_cast<int>(gram_.cols()); }

  double loss(const Vector& theta) const {
    check_dim(theta);
    return 0.5 * inv_m_ * (phi_ * theta - y_).squaredNorm();
  }

  Vector grad(const Vector& theta) const {
    check_dim(theta);
    return gram_ * theta - xty_;
  }

  void grad_into(const Vector& theta, Vector& out) const {
    out.noalias() = gram_ * theta;
    out -= xty_;
  }

  Vector hvp(const Vector& v) const {
    check_dim(v);
    return gram_ * v;
  }

  void hvp_into(const Vector& v, Vector& out) const { out.noalias() = gram_ * v; }

  const Matrix& gram() const { return gram_; }

 private:
  void check_dim(const Vector& v) const {
    require(v.size() == gram_.cols(), "parameter dimension mismatch");
  }

  Matrix phi_;
  Vector y_;
  Matrix gram_;
  Vector xty_;
  double inv_m_ = 0.0;
};

/// Mean squared-error training loss, (1/m) sum of (1/2)(h_theta(x_i) - y_i)^2.
inline double loss_j0(const ModelSpec& model, const Vector& theta,
                      const Dataset& z) {
  return BoundModel(model, z).loss(theta);
}

inline Vector grad_j0(const ModelSpec& model, const Vector& theta,
                      const Dataset& z) {
  return BoundModel(model, z).grad(theta);
}

/// Hessian-vector product of loss_j0; independent of theta for this model
/// class, but theta is kept in the signature and dimension-checked.
inline Vector hvp_j0(const ModelSpec& model, const Vector& theta,
                     const Vector& v, const Dataset& z) {
  BoundModel bound(model, z);
  require(theta.size() == bound.param_dim(), "parameter dimension mismatch");
  return bound.hvp(v);
}

/// Validation map used by the target set: the training loss evaluated on the
/// validation dataset. Target membership is reported as phi_value <= z_target.
inline double phi_value(const ModelSpec& model, const Vector& theta,
                        const Dataset& z2) {
  return loss_j0(model, theta, z2);
}

inline Vector grad_phi(const ModelSpec& model, const Vector& theta,
                       const Dataset& z2) {
  return grad_j0(model, theta, z2);
}

}  // namespace hocl
