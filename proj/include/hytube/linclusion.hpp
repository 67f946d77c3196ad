#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hytube/dual.hpp"
#include "hytube/interval.hpp"

namespace hytube {

/// Column j of an enclosure of the Jacobian of g, evaluated over the mixed
/// argument (X_1, ..., X_j, c_{j+1}, ..., c_n).
using DerivativeEnclosure =
    std::function<IntervalVector(const IntervalVector& box, const Eigen::VectorXd& center, int column)>;

/// g evaluated on dual-interval arguments.
using DualIntervalMap = std::function<Vec<DualI>(const Vec<DualI>&)>;

/// Builds a DerivativeEnclosure from a map that can be evaluated on
/// dual-interval arguments: column j seeds x_j and applies the mixing rule.
DerivativeEnclosure derivative_enclosure_from(DualIntervalMap g);

/// Linear inclusion g(x) - g(center) in co{corners} (x - center) on domain.
///
/// When the mixed Jacobian has too many uncertain entries to enumerate, the
/// inclusion keeps the interval matrix as midpoint/radius instead and sets
/// `fallback`.
struct LinearInclusion {
  Eigen::VectorXd center;
  IntervalVector domain;
  IntervalMatrix jacobian;
  std::vector<Eigen::MatrixXd> corners;
  bool fallback = false;
  Eigen::MatrixXd mid;
  Eigen::MatrixXd rad;

  Eigen::Index rows() const { return jacobian.rows(); }
  Eigen::Index cols() const { return jacobian.cols(); }
};

/// Mixed Jacobian over box with the given center (which must lie in box).
IntervalMatrix mixed_jacobian(const DerivativeEnclosure& g, const IntervalVector& box, const Eigen::VectorXd& center);

LinearInclusion build_inclusion(const DerivativeEnclosure& g, const IntervalVector& box, const Eigen::VectorXd& center,
                                std::size_t cap = kDefaultCornerCap);

}  // namespace hytube
