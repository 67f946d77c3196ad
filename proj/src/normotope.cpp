#include "hytube/normotope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace hytube {

namespace {

constexpr Eigen::Index kSmallDim = 8;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kSmallDim, kSmallDim>;

constexpr double kMembershipSlack = 4.0 * std::numeric_limits<double>::epsilon();

}  // namespace

double reciprocal_condition(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || !std::isfinite(s(0))) return 0.0;
  return s(s.size() - 1) / s(0);
}

double normalized_distance(const NormotopeD& n, const Eigen::VectorXd& x) {
  if (x.size() != n.dim()) throw Error(ErrorKind::DimensionMismatch, "point dimension differs from normotope");
  return (n.shape() * (x - n.center())).norm() / n.offset();
}

bool contains(const NormotopeD& n, const Eigen::VectorXd& x) {
  return normalized_distance(n, x) <= 1.0 + kMembershipSlack;
}

double lognorm2(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "lognorm2 needs a square matrix");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double specnorm2(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

IntervalD linear_range(const Eigen::VectorXd& a, double b, const NormotopeD& n) {
  if (a.size() != n.dim()) throw Error(ErrorKind::DimensionMismatch, "covector dimension differs from normotope");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(n.shape());
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularShape, "linear_range: singular shape");
  const Eigen::VectorXd w = lu.transpose().solve(a);
  const double mid = a.dot(n.center()) + b;
  const double rad = n.offset() * w.norm();
  return IntervalD::centered(mid, rad);
}

Eigen::VectorXd bounding_half_widths(const NormotopeD& n) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(n.shape());
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularShape, "bounding_box: singular shape");
  const Eigen::MatrixXd inv = lu.inverse();
  return n.offset() * inv.rowwise().norm();
}

IntervalVector bounding_box(const NormotopeD& n) { return make_box(n.center(), bounding_half_widths(n)); }

double offset_rate(const Eigen::MatrixXd& shape, const Eigen::MatrixXd& jac_center, const LinearInclusion& inclusion) {
  const Eigen::MatrixXd shape_inv = shape.inverse();
  if (inclusion.fallback) {
    const double spread = specnorm2(shape) * specnorm2(inclusion.rad) * specnorm2(shape_inv);
    return lognorm2(shape * (inclusion.mid - jac_center) * shape_inv) + spread;
  }
  double best = -std::numeric_limits<double>::infinity();
  if (shape.rows() > kSmallDim) {
    for (const auto& m : inclusion.corners) best = std::max(best, lognorm2(shape * (m - jac_center) * shape_inv));
    return best;
  }
  // fixed-capacity storage keeps the per-corner loop off the heap
  const SmallMatrix a = shape;
  const SmallMatrix a_inv = shape_inv;
  const SmallMatrix j = jac_center;
  Eigen::SelfAdjointEigenSolver<SmallMatrix> es(a.rows());
  for (const auto& m : inclusion.corners) {
    const SmallMatrix d = a * (SmallMatrix(m) - j) * a_inv;
    es.compute(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().maxCoeff());
  }
  return best;
}

NormotopeD embed_step(const NormotopeD& n, const Eigen::VectorXd& f_center, const Eigen::MatrixXd& jac_center,
                      const LinearInclusion& inclusion, double h) {
  if (h == 0.0) return n;
  const Eigen::VectorXd center = n.center() + h * f_center;
  const Eigen::MatrixXd shape = n.shape() - h * n.shape() * jac_center;
  const double rate = offset_rate(n.shape(), jac_center, inclusion);
  const double offset = n.offset() * (1.0 + h * rate);
  if (!(offset > 0.0)) throw Error(ErrorKind::StepTooLarge, "embedding offset became non-positive");
  if (!(reciprocal_condition(shape) >= kMinReciprocalCondition))
    throw Error(ErrorKind::StepTooLarge, "embedding shape lost invertibility");
  return NormotopeD(center, shape, offset);
}

namespace {

struct StepAttempt {
  bool ok = false;
  NormotopeD next;
};

// (center, shape) after h along x' = f(x, t), alpha' = -alpha Df(x, t),
// split at breakpoints of f. Each piece ends on the left limit.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> rk4_center_shape(const NormotopeD& n, double t, double h,
                                                             const ContinuousField& system) {
  auto stage = [&](const Eigen::VectorXd& x, const Eigen::MatrixXd& a, double tau) {
    return std::pair<Eigen::VectorXd, Eigen::MatrixXd>(system.field(x, tau), -a * system.field_jacobian(x, tau));
  };
  std::vector<double> cuts{t};
  for (double b : system.breakpoints())
    if (b > t && b < t + h) cuts.push_back(b);
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(t + h);

  Eigen::VectorXd x = n.center();
  Eigen::MatrixXd a = n.shape();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double t0 = cuts[i];
    const double dt = cuts[i + 1] - t0;
    if (dt <= 0.0) continue;
    const double mid = t0 + 0.5 * dt;
    const auto k1 = stage(x, a, t0);
    const auto k2 = stage(x + 0.5 * dt * k1.first, a + 0.5 * dt * k1.second, mid);
    const auto k3 = stage(x + 0.5 * dt * k2.first, a + 0.5 * dt * k2.second, mid);
    const auto k4 = stage(x + dt * k3.first, a + dt * k3.second, std::nextafter(cuts[i + 1], t0));
    x += dt / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
    a += dt / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
  }
  return {x, a};
}

StepAttempt try_step(const NormotopeD& n, double t, double h, const ContinuousField& system,
                     const EmbedOptions& opts) {
  const Eigen::VectorXd f = system.field(n.center(), t);
  const Eigen::MatrixXd jac = system.field_jacobian(n.center(), t);
  const Eigen::VectorXd half = bounding_half_widths(n);
  const DerivativeEnclosure derivs = system.field_derivatives(t);
  const double drift = h * f.norm();

  double inflation = opts.inflation;
  for (int attempt = 0; attempt <= opts.max_inflation_doublings; ++attempt, inflation *= 2.0) {
    const Eigen::VectorXd widened = (inflation * half).array() + drift;
    const IntervalVector domain = make_box(n.center(), widened);
    LinearInclusion inc;
    try {
      inc = build_inclusion(derivs, domain, n.center(), opts.corner_cap);
    } catch (const std::domain_error&) {
      return {};  // field undefined somewhere in the box
    }
    NormotopeD next = embed_step(n, f, jac, inc, h);
    if (opts.scheme == EmbedScheme::Rk4) {
      auto [center, shape] = rk4_center_shape(n, t, h, system);
      if (!(reciprocal_condition(shape) >= kMinReciprocalCondition))
        throw Error(ErrorKind::StepTooLarge, "embedding shape lost invertibility");
      next = NormotopeD(std::move(center), std::move(shape), next.offset());
    }
    if (box_contains(domain, bounding_box(next))) return {true, std::move(next)};
  }
  return {};
}

// Advances by h, splitting into halves when no inflation certifies the step.
NormotopeD certified_step(const NormotopeD& n, double t, double h, const ContinuousField& system,
                          const EmbedOptions& opts, int depth) {
  StepAttempt a = try_step(n, t, h, system, opts);
  if (a.ok) return a.next;
  if (depth >= opts.max_step_halvings)
    throw Error(ErrorKind::DomainViolation, "embedding step escaped its inclusion domain at t=" + std::to_string(t));
  const NormotopeD mid = certified_step(n, t, 0.5 * h, system, opts, depth + 1);
  return certified_step(mid, t + 0.5 * h, 0.5 * h, system, opts, depth + 1);
}

}  // namespace

EmbeddingTrajectory embed_flow(const NormotopeD& n0, const ContinuousField& system, const StopPredicate& stop,
                               const EmbedOptions& opts) {
  if (!(opts.step > 0.0)) throw Error(ErrorKind::InvalidState, "embedding step must be positive");
  if (n0.dim() != system.dim()) throw Error(ErrorKind::DimensionMismatch, "initial set and system dimension differ");
  EmbeddingTrajectory traj;
  traj.times.push_back(opts.start_time);
  traj.states.push_back(n0);
  if (stop && stop(traj)) return traj;
  for (std::size_t k = 0; k < opts.max_steps; ++k) {
    const double t = opts.start_time + static_cast<double>(k) * opts.step;
    traj.states.push_back(certified_step(traj.states.back(), t, opts.step, system, opts, 0));
    traj.times.push_back(opts.start_time + static_cast<double>(k + 1) * opts.step);
    if (stop && stop(traj)) return traj;
  }
  throw Error(ErrorKind::MaxSteps, "embedding stop condition never fired");
}

}  // namespace hytube
