#include "hytube/verify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

#include "hytube/errors.hpp"
#include "hytube/ode.hpp"

namespace hytube {

std::optional<SlicedNormotope> slice(const NormotopeD& n, const AffineGuard& g, double time, std::size_t index) {
  if (g.dim() != n.dim()) throw Error(ErrorKind::DimensionMismatch, "guard and normotope dimension differ");
  const Eigen::Index k = g.basis.cols();
  const Eigen::MatrixXd ab = n.shape() * g.basis;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ab);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ab.rows(), k);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  if (!(reciprocal_condition(r) >= kMinReciprocalCondition))
    throw Error(ErrorKind::DegenerateSlice, "shape times guard basis is rank deficient");

  const Eigen::VectorXd w = n.shape() * (n.center() - g.anchor);
  const Eigen::VectorXd qtw = q.transpose() * w;
  const double slack = (w - q * qtw).squaredNorm();
  const double y2 = n.offset() * n.offset();
  if (y2 < slack) return std::nullopt;

  SlicedNormotope s;
  s.center = r.triangularView<Eigen::Upper>().solve(qtw);
  s.R = r;
  s.slack = slack;
  s.radius = std::sqrt(y2 - slack);
  s.time = time;
  s.index = index;
  return s;
}

bool check_sign_condition(const NormotopeD& n, const AffineGuard& g, Side want) {
  const IntervalD range = linear_range(g.normal, g.offset, n);
  return want == Side::Above ? range.lo() > 0.0 : range.hi() < 0.0;
}

namespace {

Eigen::MatrixXd upper_inverse(const Eigen::MatrixXd& r) {
  return r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(r.rows(), r.cols()));
}

IntervalD dot(const Eigen::VectorXd& a, const IntervalVector& v) {
  IntervalD acc(0.0);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a(i) != 0.0) acc = acc + IntervalD(a(i)) * v(i);
  return acc;
}

}  // namespace

IntervalVector slice_zbox(const SlicedNormotope& s) {
  return make_box(s.center, s.radius * upper_inverse(s.R).rowwise().norm());
}

IntervalVector slice_box(const SlicedNormotope& s, const AffineGuard& g) {
  const Eigen::MatrixXd m = g.basis * upper_inverse(s.R);
  return make_box(g.embed(s.center), s.radius * m.rowwise().norm());
}

IntervalD transversality_range(const SlicedNormotope& s, const AffineGuard& g, const BoxEnclosure& field) {
  return dot(g.normal, field(slice_box(s, g)));
}

GuardReset restrict_reset(const HybridSystem& sys) {
  const AffineGuard& g = sys.guard();
  const Eigen::MatrixXd basis = g.basis;
  const Eigen::VectorXd anchor = g.anchor;
  GuardReset out;
  out.value = [&sys, &g](const Eigen::VectorXd& z) { return sys.reset(g.embed(z)); };
  out.derivs = derivative_enclosure_from([&sys, basis, anchor](const Vec<DualI>& z) {
    Vec<DualI> x(basis.rows());
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      DualI acc(anchor(i));
      for (Eigen::Index j = 0; j < basis.cols(); ++j)
        if (basis(i, j) != 0.0) acc = acc + DualI(basis(i, j)) * z(j);
      x(i) = acc;
    }
    return sys.reset_dual(x);
  });
  return out;
}

double slice_gamma(const SlicedNormotope& s, const GuardReset& reset, const Eigen::MatrixXd& alpha0,
                   const Eigen::VectorXd& x_star, std::size_t cap) {
  const double offset_term = (alpha0 * (reset.value(s.center) - x_star)).norm();
  if (s.radius == 0.0) return offset_term;
  const LinearInclusion inc = build_inclusion(reset.derivs, slice_zbox(s), s.center, cap);
  const Eigen::MatrixXd r_inv = upper_inverse(s.R);
  double gain = 0.0;
  if (inc.fallback) {
    gain = specnorm2(alpha0 * inc.mid * r_inv) + specnorm2(alpha0) * specnorm2(inc.rad) * specnorm2(r_inv);
  } else {
    for (const auto& m : inc.corners) gain = std::max(gain, specnorm2(alpha0 * m * r_inv));
  }
  return offset_term + gain * s.radius;
}

double gamma_bound(const std::vector<SlicedNormotope>& slices, const GuardReset& reset, const Eigen::MatrixXd& alpha0,
                   const Eigen::VectorXd& x_star, std::size_t cap) {
  double gamma = 0.0;
  for (const auto& s : slices) gamma = std::max(gamma, slice_gamma(s, reset, alpha0, x_star, cap));
  return gamma;
}

Window find_window(const EmbeddingTrajectory& traj, const AffineGuard& g) {
  const std::size_t n = traj.size();
  std::size_t impact = n;
  bool seen_positive = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = g.value(traj.states[i].center());
    if (h > 0.0) seen_positive = true;
    if (seen_positive && h < 0.0) {
      impact = i;
      break;
    }
  }
  if (impact == n) throw Error(ErrorKind::NoWindow, "tube center never crosses the guard");

  Window w;
  bool have_over = false;
  for (std::size_t i = impact; i < n && !have_over; ++i) {
    if (check_sign_condition(traj.states[i], g, Side::Below)) {
      w.over = i;
      have_over = true;
    }
  }
  if (!have_over) throw Error(ErrorKind::NoWindow, "tube never lies entirely below the guard");

  bool have_under = false;
  for (std::size_t i = impact; i-- > 0;) {
    if (check_sign_condition(traj.states[i], g, Side::Above)) {
      w.under = i;
      have_under = true;
      break;
    }
  }
  if (!have_under) throw Error(ErrorKind::NoWindow, "tube never lies entirely above the guard before impact");
  return w;
}

namespace {

double fixed_point_residual(const HybridSystem& sys, const Eigen::VectorXd& x) {
  const Rhs f = [&sys](double t, const Eigen::VectorXd& s) { return sys.field(s, t); };
  const GuardHit hit = integrate_to_guard(f, sys.guard(), x, OdeOptions{}, sys.breakpoints());
  return (sys.reset(hit.state) - x).norm();
}

}  // namespace

VerificationResult verify_tube(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                               const VerifyOptions& opts) {
  if (x_star.size() != sys.dim() || alpha0.rows() != sys.dim())
    throw Error(ErrorKind::DimensionMismatch, "fixed point or shape does not match the system");
  if (opts.check_fixed_point) {
    const double res = fixed_point_residual(sys, x_star);
    if (!(res <= opts.fixed_point_tol))
      throw Error(ErrorKind::InvalidState, "x* is not a fixed point (residual " + std::to_string(res) + ")");
  }
  const AffineGuard& g = sys.guard();

  VerificationResult out;
  const NormotopeD start(x_star, alpha0, 1.0);
  bool crossed_up = false;
  const StopPredicate stop = [&g, &crossed_up](const EmbeddingTrajectory& traj) {
    const NormotopeD& last = traj.states.back();
    if (!crossed_up) {
      crossed_up = g.value(last.center()) > 0.0;
      return false;
    }
    return check_sign_condition(last, g, Side::Below);
  };
  out.tube = embed_flow(start, sys, stop, opts.embed);

  EmbedOptions fine = opts.embed;
  for (int r = 0; r < opts.max_window_refinements; ++r) {
    const Window w = find_window(out.tube, g);
    if (w.over - w.under >= opts.min_window_samples) break;
    fine.step *= 0.5;
    fine.start_time = out.tube.times[w.under];
    crossed_up = g.value(out.tube.states[w.under].center()) > 0.0;
    EmbeddingTrajectory tail = embed_flow(out.tube.states[w.under], sys, stop, fine);
    out.tube.times.resize(w.under);
    out.tube.states.resize(w.under);
    out.tube.times.insert(out.tube.times.end(), tail.times.begin(), tail.times.end());
    out.tube.states.insert(out.tube.states.end(), tail.states.begin(), tail.states.end());
  }

  out.slices.reserve(out.tube.size());
  for (std::size_t i = 0; i < out.tube.size(); ++i) out.slices.push_back(slice(out.tube.states[i], g, out.tube.times[i], i));

  out.window = find_window(out.tube, g);
  out.t_under = out.tube.times[out.window.under];
  out.t_over = out.tube.times[out.window.over];
  out.cond_a = check_sign_condition(out.tube.states[out.window.under], g, Side::Above);
  out.cond_b = check_sign_condition(out.tube.states[out.window.over], g, Side::Below);

  out.cond_c = true;
  out.cond_d = true;
  for (std::size_t i = 0; i <= out.window.over; ++i) {
    if (!out.slices[i]) continue;
    const double t = out.tube.times[i];
    const IntervalD rate =
        transversality_range(*out.slices[i], g, [&sys, t](const IntervalVector& box) { return sys.field_enclosure(box, t); });
    if (i <= out.window.under) out.cond_c = out.cond_c && rate.lo() > 0.0;
    if (i >= out.window.under) {
      out.cond_d = out.cond_d && rate.hi() < 0.0;
      out.intersections.push_back(*out.slices[i]);
    }
  }

  if (out.intersections.empty()) {
    out.failure = "no sampled guard intersection inside the window";
    out.gamma = std::numeric_limits<double>::infinity();
  } else {
    out.gamma = gamma_bound(out.intersections, restrict_reset(sys), alpha0, x_star, opts.embed.corner_cap);
  }
  out.verified = out.cond_a && out.cond_b && out.cond_c && out.cond_d && out.gamma <= 1.0;
  return out;
}

VerificationResult verify_at_scale(const HybridSystem& sys, const Eigen::VectorXd& x_star,
                                   const Eigen::MatrixXd& alpha0, double s, const VerifyOptions& opts) {
  VerificationResult out;
  try {
    out = verify_tube(sys, x_star, alpha0 / s, opts);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::DomainViolation:
      case ErrorKind::StepTooLarge:
      case ErrorKind::MaxSteps:
      case ErrorKind::NoWindow:
      case ErrorKind::DegenerateSlice:
      case ErrorKind::SingularShape:
        out = VerificationResult{};
        out.failure = e.what();
        break;
      default:
        throw;
    }
  } catch (const std::domain_error& e) {
    out = VerificationResult{};
    out.failure = e.what();
  }
  out.scale = s;
  return out;
}

RescaleResult rescale_bisection(const ScaleVerifier& verify, double s_tol) {
  if (!(s_tol > 0.0)) throw Error(ErrorKind::InvalidState, "rescale tolerance must be positive");
  RescaleResult out;
  auto run = [&](double s) {
    ++out.evaluations;
    VerificationResult r = verify(s);
    r.scale = s;
    return r;
  };

  double lo = 0.0, hi = 0.0;
  VerificationResult first = run(1.0);
  if (first.verified) {
    lo = 1.0;
    while (true) {
      if (2.0 * lo > kMaxScale) {
        hi = lo;
        break;
      }
      if (!run(2.0 * lo).verified) {
        hi = 2.0 * lo;
        break;
      }
      lo *= 2.0;
    }
  } else {
    hi = 1.0;
    while (lo == 0.0) {
      const double s = 0.5 * hi;
      if (s < kMinScale) throw Error(ErrorKind::NoVerifiableScale, "no certificate down to scale 2^-20");
      if (run(s).verified)
        lo = s;
      else
        hi = s;
    }
  }

  while ((hi - lo) > s_tol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (run(mid).verified)
      lo = mid;
    else
      hi = mid;
  }

  out.result = run(lo);
  if (!out.result.verified)
    throw Error(ErrorKind::NoVerifiableScale, "scale " + std::to_string(lo) + " failed re-verification");
  out.scale = lo;
  return out;
}

RescaleResult rescale_bisection(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                                double s_tol, const VerifyOptions& opts) {
  if (opts.check_fixed_point) {
    const double res = fixed_point_residual(sys, x_star);
    if (!(res <= opts.fixed_point_tol))
      throw Error(ErrorKind::InvalidState, "x* is not a fixed point (residual " + std::to_string(res) + ")");
  }
  VerifyOptions inner = opts;
  inner.check_fixed_point = false;
  return rescale_bisection([&](double s) { return verify_at_scale(sys, x_star, alpha0, s, inner); }, s_tol);
}

}  // namespace hytube
