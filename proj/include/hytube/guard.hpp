#pragma once

#include <Eigen/Core>

namespace hytube {

/// Affine guard h(x) = a^T x + b, with an orthonormal basis of the
/// hyperplane directions and an anchor point on the hyperplane.
struct AffineGuard {
  Eigen::VectorXd normal;
  double offset = 0.0;
  Eigen::MatrixXd basis;   // n x (n-1), a^T basis = 0
  Eigen::VectorXd anchor;  // h(anchor) = 0

  AffineGuard() = default;
  AffineGuard(Eigen::VectorXd a, double b);

  Eigen::Index dim() const { return normal.size(); }
  double value(const Eigen::VectorXd& x) const { return normal.dot(x) + offset; }
  /// Point on the hyperplane with basis coordinates z.
  Eigen::VectorXd embed(const Eigen::VectorXd& z) const { return basis * z + anchor; }
};

}  // namespace hytube
