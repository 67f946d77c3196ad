#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hytube/dual.hpp"
#include "hytube/guard.hpp"
#include "hytube/interval.hpp"
#include "hytube/linclusion.hpp"

namespace hytube {

/// Closed-loop continuous field x' = f(x, t), where t is the phase (time
/// since the last reset). Every evaluation flavour the tube machinery needs
/// is exposed: points, Jacobians, interval boxes and dual-interval seeds.
class ContinuousField {
 public:
  virtual ~ContinuousField() = default;

  virtual int dim() const = 0;
  virtual Eigen::VectorXd field(const Eigen::VectorXd& x, double t) const = 0;
  virtual Eigen::MatrixXd field_jacobian(const Eigen::VectorXd& x, double t) const = 0;
  virtual IntervalVector field_enclosure(const IntervalVector& box, double t) const = 0;
  virtual Vec<DualI> field_dual(const Vec<DualI>& x, double t) const = 0;

  /// Phase values at which f is discontinuous in t.
  virtual std::vector<double> breakpoints() const { return {}; }

  DerivativeEnclosure field_derivatives(double t) const {
    return derivative_enclosure_from([this, t](const Vec<DualI>& x) { return field_dual(x, t); });
  }
};

/// Closed-loop hybrid system with one affine guard and one reset map.
class HybridSystem : public ContinuousField {
 public:
  virtual const AffineGuard& guard() const = 0;
  virtual Eigen::VectorXd reset(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd reset_jacobian(const Eigen::VectorXd& x) const = 0;
  virtual Vec<DualI> reset_dual(const Vec<DualI>& x) const = 0;

  /// h'(x) = a^T f(x, t).
  double guard_rate(const Eigen::VectorXd& x, double t) const { return guard().normal.dot(field(x, t)); }
};

namespace detail {

template <typename Fn>
Eigen::MatrixXd point_jacobian(const Eigen::VectorXd& x, Fn&& fn) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec<DualD> arg(n);
    for (Eigen::Index k = 0; k < n; ++k) arg(k) = DualD(x(k), k == j ? 1.0 : 0.0);
    const Vec<DualD> out = fn(arg);
    if (j == 0) jac.resize(out.size(), n);
    for (Eigen::Index i = 0; i < out.size(); ++i) jac(i, j) = out(i).d;
  }
  return jac;
}

}  // namespace detail

/// Adapts a model with templated `flow<S>(x, t)` and `jump<S>(x)` members to
/// the HybridSystem interface.
template <typename Model>
class ModelSystem final : public HybridSystem {
 public:
  explicit ModelSystem(Model model) : model_(std::move(model)), guard_(model_.guard()) {}

  const Model& model() const { return model_; }

  int dim() const override { return model_.dim(); }
  const AffineGuard& guard() const override { return guard_; }
  std::vector<double> breakpoints() const override { return model_.breakpoints(); }

  Eigen::VectorXd field(const Eigen::VectorXd& x, double t) const override { return model_.template flow<double>(x, t); }
  Eigen::MatrixXd field_jacobian(const Eigen::VectorXd& x, double t) const override {
    return detail::point_jacobian(x, [&](const Vec<DualD>& a) { return model_.template flow<DualD>(a, t); });
  }
  IntervalVector field_enclosure(const IntervalVector& box, double t) const override {
    return model_.template flow<IntervalD>(box, t);
  }
  Vec<DualI> field_dual(const Vec<DualI>& x, double t) const override { return model_.template flow<DualI>(x, t); }

  Eigen::VectorXd reset(const Eigen::VectorXd& x) const override { return model_.template jump<double>(x); }
  Eigen::MatrixXd reset_jacobian(const Eigen::VectorXd& x) const override {
    return detail::point_jacobian(x, [&](const Vec<DualD>& a) { return model_.template jump<DualD>(a); });
  }
  Vec<DualI> reset_dual(const Vec<DualI>& x) const override { return model_.template jump<DualI>(x); }

 private:
  Model model_;
  AffineGuard guard_;
};

template <typename Model>
std::shared_ptr<const HybridSystem> make_system(Model model) {
  return std::make_shared<ModelSystem<Model>>(std::move(model));
}

}  // namespace hytube
