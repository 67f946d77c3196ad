#include "hytube/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hytube/errors.hpp"

namespace hytube {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
  Eigen::VectorXd y;
  Eigen::VectorXd err;
};

// Stage times are clamped below `t_cap` so that a step ending on a stop
// never samples the field past the jump.
StepResult dp_step(const Rhs& f, double t, const Eigen::VectorXd& x, double h, double t_cap) {
  auto at = [&](double c) { return std::min(t + c * h, t_cap); };
  const Eigen::VectorXd k1 = f(at(0.0), x);
  const Eigen::VectorXd k2 = f(at(c2), x + h * a21 * k1);
  const Eigen::VectorXd k3 = f(at(c3), x + h * (a31 * k1 + a32 * k2));
  const Eigen::VectorXd k4 = f(at(c4), x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Eigen::VectorXd k5 = f(at(c5), x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Eigen::VectorXd k6 = f(at(1.0), x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  StepResult out;
  out.y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const Eigen::VectorXd k7 = f(at(1.0), out.y);
  out.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return out;
}

double error_norm(const StepResult& s, const Eigen::VectorXd& x, const OdeOptions& o) {
  const Eigen::ArrayXd scale = o.abs_tol + o.rel_tol * x.array().abs().max(s.y.array().abs());
  return std::sqrt((s.err.array() / scale).square().mean());
}

// Stops closer than a few ulps are one stop; a breakpoint wins over a sample
// so the field jump still lands on a step boundary.
bool same_time(double a, double b) {
  return std::abs(a - b) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
}

std::vector<double> merged_stops(const std::vector<double>& breaks, const std::vector<double>& samples) {
  std::vector<double> out;
  for (double t : breaks)
    if (t > 0.0) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), same_time), out.end());
  const std::size_t n_breaks = out.size();
  for (double t : samples) {
    if (!(t > 0.0)) continue;
    const auto it = std::lower_bound(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_breaks), t);
    const bool near_break = (it != out.begin() + static_cast<std::ptrdiff_t>(n_breaks) && same_time(*it, t)) ||
                            (it != out.begin() && same_time(*(it - 1), t));
    if (!near_break) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), same_time), out.end());
  return out;
}

// Event time in (0, h] for g(tau) = guard(step(tau)) with g(0) > 0 >= g(h).
double locate_event(const Rhs& f, const AffineGuard& guard, double t, const Eigen::VectorXd& x, double h,
                    double t_cap, double g0, double gh) {
  double lo = 0.0, hi = h, glo = g0, ghi = gh;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (ghi == 0.0) return hi;
    double tau = (lo * ghi - hi * glo) / (ghi - glo);
    if (!(tau > lo && tau < hi)) tau = 0.5 * (lo + hi);
    if (tau <= lo || tau >= hi) break;
    const double g = guard.value(dp_step(f, t, x, tau, t_cap).y);
    if (g > 0.0) {
      lo = tau;
      glo = g;
      if (side == 1) ghi *= 0.5;
      side = 1;
    } else {
      hi = tau;
      ghi = g;
      if (side == -1) glo *= 0.5;
      side = -1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t + hi)) break;
  }
  return hi;
}

struct Stepper {
  const Rhs& f;
  const OdeOptions& opts;
  std::vector<double> stops;
  double t = 0.0;
  Eigen::VectorXd x;
  double step = 0.0;
  std::size_t next = 0;

  Stepper(const Rhs& fn, const OdeOptions& o, std::vector<double> s, Eigen::VectorXd x0)
      : f(fn), opts(o), stops(std::move(s)), x(std::move(x0)) {
    step = std::min(opts.max_step, 1e-3);
  }

  double stop_after() const { return next < stops.size() ? stops[next] : std::numeric_limits<double>::infinity(); }

  struct Attempt {
    double h;
    double t_new;
    double t_cap;
    StepResult res;
  };

  // Tries steps until one is accepted; does not advance the state.
  Attempt attempt(double t_end) {
    while (next < stops.size() && same_time(stops[next], t)) ++next;
    for (std::size_t tries = 0; tries < 100000; ++tries) {
      const double target = std::min(stop_after(), t_end);
      const double proposed = step;
      double h = std::min(step, target - t);
      double t_new = t + h;
      if (h >= target - t) {
        h = target - t;
        t_new = target;
      }
      if (!(h > 1e-15 * std::max(1.0, std::abs(t))))
        throw Error(ErrorKind::MaxSteps, "integration step size underflow at t=" + std::to_string(t));
      const double t_cap = std::nextafter(t_new, -std::numeric_limits<double>::infinity());
      StepResult res = dp_step(f, t, x, h, std::max(t_cap, t));
      const double en = error_norm(res, x, opts);
      if (!std::isfinite(en)) {
        step = 0.25 * h;
        continue;
      }
      const double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
      if (en <= 1.0) {
        step = std::min(opts.max_step, h * std::clamp(fac, 0.2, 5.0));
        if (h < proposed) step = std::max(step, proposed);
        return {h, t_new, std::max(t_cap, t), std::move(res)};
      }
      step = h * std::clamp(fac, 0.2, 1.0);
    }
    throw Error(ErrorKind::MaxSteps, "integration rejected too many steps");
  }

  void advance(Attempt& a) {
    t = a.t_new;
    x = std::move(a.res.y);
    while (next < stops.size() && stops[next] <= t) ++next;
  }
};

}  // namespace

GuardHit integrate_to_guard(const Rhs& f, const AffineGuard& guard, const Eigen::VectorXd& x0, const OdeOptions& opts,
                            const std::vector<double>& stops, const std::vector<double>& sample_times) {
  if (x0.size() != guard.dim()) throw Error(ErrorKind::DimensionMismatch, "initial state and guard dimension differ");
  std::vector<double> samples(sample_times);
  std::sort(samples.begin(), samples.end());
  Stepper w(f, opts, merged_stops(stops, samples), x0);

  GuardHit hit;
  std::size_t sample_idx = 0;
  auto record = [&] {
    while (sample_idx < samples.size() && (samples[sample_idx] <= w.t || same_time(samples[sample_idx], w.t))) {
      if (same_time(samples[sample_idx], w.t)) {
        hit.samples.times.push_back(w.t);
        hit.samples.states.push_back(w.x);
      }
      ++sample_idx;
    }
  };
  record();

  double g = guard.value(w.x);
  for (std::size_t k = 0; k < opts.max_steps; ++k) {
    if (w.t >= opts.horizon || same_time(w.t, opts.horizon)) break;
    auto a = w.attempt(opts.horizon);
    const double g_new = guard.value(a.res.y);
    if (g > 0.0 && g_new <= 0.0) {
      const double tau = locate_event(f, guard, w.t, w.x, a.h, a.t_cap, g, g_new);
      const double t_hit = tau == a.h ? a.t_new : w.t + tau;
      Eigen::VectorXd x_hit = tau == a.h ? a.res.y : dp_step(f, w.t, w.x, tau, a.t_cap).y;
      const double rate = guard.normal.dot(f(std::min(t_hit, a.t_cap), x_hit));
      if (!(rate < 0.0))
        throw Error(ErrorKind::NonTransversalCrossing, "guard reached with h' >= 0 at t=" + std::to_string(t_hit));
      hit.time = t_hit;
      hit.state = std::move(x_hit);
      return hit;
    }
    w.advance(a);
    g = g_new;
    record();
  }
  throw Error(ErrorKind::NoImpact, "no guard crossing within the integration horizon");
}

Eigen::VectorXd integrate(const Rhs& f, const Eigen::VectorXd& x0, double t_end, const OdeOptions& opts,
                          const std::vector<double>& stops) {
  if (t_end < 0.0) throw Error(ErrorKind::InvalidState, "negative integration interval");
  Stepper w(f, opts, merged_stops(stops, {}), x0);
  auto done = [&] { return w.t >= t_end || same_time(w.t, t_end); };
  for (std::size_t k = 0; k < opts.max_steps && !done(); ++k) {
    auto a = w.attempt(t_end);
    w.advance(a);
  }
  if (!done()) throw Error(ErrorKind::MaxSteps, "integration did not reach the end time");
  return w.x;
}

}  // namespace hytube
