#include "hytube/walker.hpp"

namespace hytube::walker {

void WalkerParams::validate() const {
  if (!(mass > 0.0) || !(gravity > 0.0) || !(leg_length > 0.0))
    throw Error(ErrorKind::Config, "walker mass, gravity and leg_length must be positive");
  if (!(hip_angle > 0.0 && hip_angle < std::numbers::pi / 2.0))
    throw Error(ErrorKind::Config, "walker hip_angle must lie in (0, pi/2)");
}

Eigen::Vector4d dynamics(const WalkerState& s, double u, const WalkerParams& p) {
  if (!(s.r > 0.0)) throw Error(ErrorKind::InvalidState, "leg length must be positive");
  const double rddot = s.r * s.thetadot * s.thetadot + u / p.mass - p.gravity * std::cos(s.theta);
  const double thetaddot = -(2.0 * s.rdot * s.thetadot - p.gravity * std::sin(s.theta)) / s.r;
  return {s.rdot, s.thetadot, rddot, thetaddot};
}

double guard_h_physical(const WalkerState& s, const WalkerParams& p) {
  return s.r * std::cos(s.theta) + p.leg_length * std::cos(std::numbers::pi + p.hip_angle - s.theta);
}

WalkerState reset(const WalkerState& s, double v, const WalkerParams& p) {
  Eigen::VectorXd phys(4);
  phys << s.r, s.theta, s.rdot, s.thetadot;
  const Eigen::VectorXd out = physical_reset<double>(phys, v, p);
  return {out(0), out(1), out(2), out(3)};
}

Eigen::Vector4d transform(const WalkerState& s) {
  const double c = std::cos(s.theta);
  if (!(std::abs(s.theta) < std::numbers::pi / 2.0) || c <= 0.0)
    throw Error(ErrorKind::SingularAngle, "transform undefined for |theta| >= pi/2");
  return {s.r, std::tan(s.theta), s.rdot, s.thetadot / (c * c)};
}

WalkerState untransform(const Eigen::Vector4d& x) {
  return {x(0), std::atan(x(1)), x(2), x(3) / (1.0 + x(1) * x(1))};
}

AffineGuard transformed_guard(const WalkerParams& p) {
  // Zero set  -x1/(r0 sin thetaH) + x2 + 1/tan thetaH = 0, negated so that
  // h > 0 on the pre-impact side, matching the physical swing-foot height.
  Eigen::VectorXd a(4);
  a << 1.0 / (p.leg_length * std::sin(p.hip_angle)), -1.0, 0.0, 0.0;
  return AffineGuard(a, -1.0 / std::tan(p.hip_angle));
}

}  // namespace hytube::walker
