#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "hytube/dual.hpp"
#include "hytube/errors.hpp"
#include "hytube/guard.hpp"
#include "hytube/interval.hpp"

namespace hytube::walker {

/// Planar telescoping-leg walker: point mass on a massless stance leg of
/// variable length, swing leg held at length r0 and angle thetaH.
struct WalkerParams {
  double mass = 1.0;
  double gravity = 9.81;
  double leg_length = 1.0;  // r0
  double hip_angle = 0.5;   // thetaH

  void validate() const;
};

struct WalkerState {
  double r = 1.0;
  double theta = 0.0;
  double rdot = 0.0;
  double thetadot = 0.0;
};

/// (r', theta', r'', theta'') under stance-leg force u.
Eigen::Vector4d dynamics(const WalkerState& s, double u, const WalkerParams& p);

/// Swing-foot height: positive before touchdown.
double guard_h_physical(const WalkerState& s, const WalkerParams& p);

/// Impact with impulse v along the stance leg followed by leg relabeling.
WalkerState reset(const WalkerState& s, double v, const WalkerParams& p);

/// x = (r, tan theta, r', theta' / cos^2 theta).
Eigen::Vector4d transform(const WalkerState& s);
WalkerState untransform(const Eigen::Vector4d& x);

/// Guard as an affine function of the transformed state, oriented so that
/// it has the sign of guard_h_physical.
AffineGuard transformed_guard(const WalkerParams& p);

/// Transformed-coordinate vector field, written directly in x.
template <typename S>
Vec<S> transformed_dynamics(const Vec<S>& x, const S& u, const WalkerParams& p) {
  using std::sqrt;
  const S& x1 = x(0);
  const S& x2 = x(1);
  const S& x3 = x(2);
  const S& x4 = x(3);
  const S sec2 = S(1.0) + x2 * x2;  // 1 / cos^2 theta
  const S sec = sqrt(sec2);
  const S thetadot = x4 / sec2;
  const S sin_theta = x2 / sec;
  const S cos_theta = S(1.0) / sec;
  const S thetaddot = -(S(2.0) * x3 * thetadot - p.gravity * sin_theta) / x1;

  Vec<S> out(4);
  out(0) = x3;
  out(1) = x4;
  out(2) = x1 * thetadot * thetadot + u / p.mass - p.gravity * cos_theta;
  out(3) = sec2 * thetaddot + S(2.0) * thetadot * thetadot * x2 * sec2;
  return out;
}

/// Physical reset on (r, theta, r', theta'), generic over the scalar.
template <typename S>
Vec<S> physical_reset(const Vec<S>& s, const S& v, const WalkerParams& p) {
  using std::cos;
  using std::sin;
  const S& r = s(0);
  const S& theta = s(1);
  const S& rdot = s(2);
  const S& thetadot = s(3);
  const double ch = std::cos(p.hip_angle);
  const double sh = std::sin(p.hip_angle);

  const S c = r * thetadot * ch + rdot * sh;
  const S beta = theta - p.hip_angle;
  const S st = sin(theta);
  const S ct = cos(theta);
  const S w1 = v * st + c * cos(beta);
  const S w2 = v * ct - c * sin(beta);
  // [r thetadot+, rdot+] = R(-theta) [w1, w2]
  const S r_thetadot_plus = ct * w1 + st * w2;
  const S rdot_plus = -(st * w1) + ct * w2;

  Vec<S> out(4);
  out(0) = S(p.leg_length);
  out(1) = S(p.hip_angle) - theta;
  out(2) = rdot_plus;
  out(3) = r_thetadot_plus / p.leg_length;
  return out;
}

/// phi o Delta o phi^{-1}: the reset expressed in transformed coordinates.
template <typename S>
Vec<S> transformed_reset(const Vec<S>& x, const S& v, const WalkerParams& p) {
  using std::atan;
  using std::tan;
  Vec<S> phys(4);
  phys(0) = x(0);
  phys(1) = atan(x(1));
  phys(2) = x(2);
  phys(3) = x(3) / (S(1.0) + x(1) * x(1));

  const Vec<S> post = physical_reset<S>(phys, v, p);

  Vec<S> out(4);
  const S t = tan(post(1));
  out(0) = post(0);
  out(1) = t;
  out(2) = post(2);
  out(3) = post(3) * (S(1.0) + t * t);
  return out;
}

}  // namespace hytube::walker
