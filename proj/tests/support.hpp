#pragma once

#include <cmath>
#include <random>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/QR>

#include "hytube/interval.hpp"
#include "hytube/normotope.hpp"

namespace hytube::testing {

// Small generators for property tests. Everything takes the engine by
// reference so a test reproduces from its seed.
using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Eigen::VectorXd uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(rng, lo, hi);
  return v;
}

inline Eigen::MatrixXd uniform_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double lo, double hi) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(rng, lo, hi);
  return m;
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Eigen::VectorXd unit_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v;
  do v = gaussian_vector(rng, n);
  while (v.norm() < 1e-12);
  return v / v.norm();
}

inline IntervalD random_interval(Rng& rng, double lo = -10.0, double hi = 10.0) {
  return IntervalD::hull(uniform(rng, lo, hi), uniform(rng, lo, hi));
}

inline double sample_in(Rng& rng, const IntervalD& x) {
  if (x.is_singleton()) return x.lo();
  return std::clamp(uniform(rng, x.lo(), x.hi()), x.lo(), x.hi());
}

inline IntervalMatrix random_interval_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  IntervalMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = random_interval(rng, -3.0, 3.0);
  return m;
}

// Well-conditioned shape: orthogonal times diag in [0.5, 3].
inline Eigen::MatrixXd random_shape(Rng& rng, Eigen::Index n) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(uniform_matrix(rng, n, n, -1.0, 1.0));
  Eigen::MatrixXd q = qr.householderQ();
  return q * uniform_vector(rng, n, 0.5, 3.0).asDiagonal();
}

inline NormotopeD random_normotope(Rng& rng, Eigen::Index n) {
  return NormotopeD(uniform_vector(rng, n, -2.0, 2.0), random_shape(rng, n), uniform(rng, 0.5, 2.0));
}

// Point of the set at normalized radius rho along a uniform direction.
inline Eigen::VectorXd point_at(const NormotopeD& n, Rng& rng, double rho) {
  const Eigen::VectorXd u = unit_vector(rng, n.dim());
  return n.center() + n.offset() * rho * n.shape().partialPivLu().solve(u);
}

}  // namespace hytube::testing
