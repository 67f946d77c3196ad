#pragma once

#include <vector>

#include <Eigen/Core>

#include "hytube/dual.hpp"
#include "hytube/guard.hpp"
#include "hytube/system.hpp"

namespace hytube::testing {

// x' = A x + c, guard a^T x + b, reset x -> L x + d.
struct AffineModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  Eigen::VectorXd a;
  double b = 0.0;
  Eigen::MatrixXd L;
  Eigen::VectorXd d;

  int dim() const { return static_cast<int>(A.rows()); }
  AffineGuard guard() const { return AffineGuard(a, b); }
  std::vector<double> breakpoints() const { return {}; }

  template <typename S>
  static Vec<S> affine(const Eigen::MatrixXd& M, const Eigen::VectorXd& off, const Vec<S>& x) {
    Vec<S> out(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      S acc(off(i));
      for (Eigen::Index j = 0; j < M.cols(); ++j)
        if (M(i, j) != 0.0) acc = acc + S(M(i, j)) * x(j);
      out(i) = acc;
    }
    return out;
  }
  template <typename S>
  Vec<S> flow(const Vec<S>& x, double) const {
    return affine<S>(A, c, x);
  }
  template <typename S>
  Vec<S> jump(const Vec<S>& x) const {
    return affine<S>(L, d, x);
  }
};

// Van der Pol oscillator, mu = 1; the guard and reset are placeholders.
struct VanDerPol {
  int dim() const { return 2; }
  AffineGuard guard() const { return AffineGuard(Eigen::Vector2d(1.0, 0.0), 10.0); }
  std::vector<double> breakpoints() const { return {}; }
  template <typename S>
  Vec<S> flow(const Vec<S>& x, double) const {
    Vec<S> out(2);
    out(0) = x(1);
    out(1) = (S(1.0) - x(0) * x(0)) * x(1) - x(0);
    return out;
  }
  template <typename S>
  Vec<S> jump(const Vec<S>& x) const {
    return x;
  }
};

}  // namespace hytube::testing
