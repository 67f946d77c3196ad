#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "hytube/guard.hpp"

namespace hytube {

using Rhs = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double max_step = 0.02;
  double horizon = 5.0;
  std::size_t max_steps = 1000000;
  double event_tol = 1e-10;
};

struct FlowSamples {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

struct GuardHit {
  double time = 0.0;
  Eigen::VectorXd state;
  FlowSamples samples;  // states at the requested sample times before the hit
};

/// Adaptive Dormand-Prince 5(4) integration of x' = f(t, x) from phase 0
/// until the guard value goes from positive to non-positive.
///
/// `stops` are phase values where f may jump; steps end exactly on them and
/// stages evaluated at a step's right end see the left limit. Upward
/// crossings are ignored. The event is located by re-stepping from the last
/// accepted point, to machine precision. Throws NoImpact past the horizon and
/// NonTransversalCrossing if h' >= 0 at the event.
GuardHit integrate_to_guard(const Rhs& f, const AffineGuard& guard, const Eigen::VectorXd& x0,
                            const OdeOptions& opts, const std::vector<double>& stops = {},
                            const std::vector<double>& sample_times = {});

/// Plain integration over [0, t_end] with the same stepping rules.
Eigen::VectorXd integrate(const Rhs& f, const Eigen::VectorXd& x0, double t_end, const OdeOptions& opts,
                          const std::vector<double>& stops = {});

}  // namespace hytube
