#include "hytube/gait.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "hytube/errors.hpp"

namespace hytube {

Eigen::VectorXd NominalTrajectory::at(double t) const {
  if (times.empty()) throw Error(ErrorKind::InvalidState, "empty nominal trajectory");
  if (t <= times.front()) return states.front();
  if (t >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  const double dt = times[i + 1] - times[i];
  const double s = (t - times[i]) / dt;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * states[i] + (s3 - 2 * s2 + s) * dt * rates[i] + (-2 * s3 + 3 * s2) * states[i + 1] +
         (s3 - s2) * dt * left_rates[i + 1];
}

WalkerClosedLoop::WalkerClosedLoop(const GaitSpec& gait)
    : params_(gait.params),
      period_(gait.period),
      u_ff_(gait.u_ff),
      v_ff_(gait.v_ff),
      x_pre_(gait.x_pre.size() == 4 ? gait.x_pre : Eigen::VectorXd::Zero(4)),
      k_ds_(gait.k_ds.size() == 4 ? gait.k_ds : Eigen::VectorXd::Zero(4)),
      k_track_(gait.k_track.size() == 4 ? gait.k_track : Eigen::VectorXd::Zero(4)),
      tracking_(k_track_.cwiseAbs().maxCoeff() > 0.0),
      nominal_(std::make_shared<NominalTrajectory>(gait.nominal)) {
  if (u_ff_.empty()) throw Error(ErrorKind::InvalidState, "gait has no feedforward samples");
  if (tracking_ && nominal_->times.empty()) throw Error(ErrorKind::InvalidState, "tracking needs a nominal trajectory");
  for (std::size_t k = 1; k < u_ff_.size(); ++k) breakpoints_.push_back(static_cast<double>(k) * gait.sample_step);
}

std::shared_ptr<const HybridSystem> make_closed_loop(const GaitSpec& gait) { return make_system(WalkerClosedLoop(gait)); }

StepOutcome simulate_step(const HybridSystem& sys, const Eigen::VectorXd& x0, const OdeOptions& opts,
                          const std::vector<double>& sample_times) {
  const Rhs f = [&sys](double t, const Eigen::VectorXd& x) { return sys.field(x, t); };
  GuardHit hit = integrate_to_guard(f, sys.guard(), x0, opts, sys.breakpoints(), sample_times);
  StepOutcome out;
  out.post = sys.reset(hit.state);
  out.pre = std::move(hit.state);
  out.impact_time = hit.time;
  out.samples = std::move(hit.samples);
  return out;
}

Eigen::VectorXd step_map(const HybridSystem& sys, const Eigen::VectorXd& x, const OdeOptions& opts) {
  return simulate_step(sys, x, opts).post;
}

namespace {

double relative_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(a.norm(), std::numeric_limits<double>::min());
}

Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
                                 const Eigen::VectorXd& x, double step) {
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += step;
    xm(j) -= step;
    const Eigen::VectorXd d = (F(xp) - F(xm)) / (2.0 * step);
    if (j == 0) jac.resize(d.size(), x.size());
    jac.col(j) = d;
  }
  return jac;
}

OdeOptions tight_ode() {
  OdeOptions o;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-12;
  return o;
}

}  // namespace

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F, const Eigen::VectorXd& x,
                            const FdOptions& opts, double* richardson) {
  const Eigen::MatrixXd fine = central_jacobian(F, x, opts.step);
  const Eigen::MatrixXd coarse = central_jacobian(F, x, opts.check_step);
  const double gap = relative_gap(fine, coarse);
  if (richardson) *richardson = gap;
  if (!(gap <= opts.tolerance))
    throw Error(ErrorKind::FiniteDifferenceInconsistent, "finite-difference Jacobians disagree by " + std::to_string(gap));
  return fine;
}

StepLinearization step_jacobians(const ParametricStep& F, const Eigen::VectorXd& x, double v, const FdOptions& opts) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd xv(n + 1);
  xv << x, v;
  StepLinearization lin;
  const Eigen::MatrixXd j =
      fd_jacobian([&](const Eigen::VectorXd& a) { return F(a.head(n), a(n)); }, xv, opts, &lin.richardson);
  lin.A = j.leftCols(n);
  lin.B = j.col(n);
  return lin;
}

Eigen::RowVectorXd pole_placement(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, const std::vector<double>& poles) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.size() != n || static_cast<Eigen::Index>(poles.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "pole placement needs square A, matching B and n poles");
  Eigen::MatrixXd ctrb(n, n);
  ctrb.col(0) = B;
  for (Eigen::Index k = 1; k < n; ++k) ctrb.col(k) = A * ctrb.col(k - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
  const auto& sv = svd.singularValues();
  if (!(sv(n - 1) > 1e-10 * std::max(1.0, sv(0)))) throw Error(ErrorKind::Uncontrollable, "(A, B) is not controllable");

  Eigen::MatrixXd charpoly = Eigen::MatrixXd::Identity(n, n);
  for (double p : poles) charpoly = charpoly * (A - p * Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd last = Eigen::VectorXd::Unit(n, n - 1);
  const Eigen::VectorXd w = ctrb.transpose().fullPivLu().solve(last);
  return -(w.transpose() * charpoly);
}

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::DimensionMismatch, "spectral radius needs a square matrix");
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

GaitSpec feedforward_gait(const walker::WalkerParams& params, const TrajoptResult& tr, const TrajoptOptions& opts) {
  GaitSpec g;
  g.params = params;
  g.sample_step = opts.step;
  g.u_ff = tr.u;
  g.v_ff = tr.v;
  g.period = opts.samples * opts.step;
  g.x_star = tr.x0;
  g.trajopt_cost = tr.cost;
  g.trajopt_violation = tr.violation;
  return g;
}

Eigen::VectorXd polish_fixed_point(const HybridSystem& sys, Eigen::VectorXd x, double tol, double* residual) {
  const OdeOptions ode = tight_ode();
  auto F = [&](const Eigen::VectorXd& z) { return step_map(sys, z, ode); };
  Eigen::VectorXd r = F(x) - x;
  for (int it = 0; it < 60 && r.norm() > 0.01 * tol; ++it) {
    FdOptions fd;
    fd.tolerance = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd J = central_jacobian(F, x, fd.step) - Eigen::MatrixXd::Identity(x.size(), x.size());
    const Eigen::VectorXd dx = -J.colPivHouseholderQr().solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
      const Eigen::VectorXd trial = x + lambda * dx;
      Eigen::VectorXd rt;
      try {
        rt = F(trial) - trial;
      } catch (const Error&) {
        continue;
      }
      if (rt.norm() < r.norm()) {
        x = trial;
        r = rt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  *residual = r.norm();
  return x;
}

NominalTrajectory nominal_from(const HybridSystem& sys, const Eigen::VectorXd& x_star, double sample_step,
                               double* period, Eigen::VectorXd* pre) {
  const OdeOptions ode = tight_ode();
  const StepOutcome probe = simulate_step(sys, x_star, ode);
  std::vector<double> nodes;
  for (int j = 0;; ++j) {
    const double t = (static_cast<double>(j) * sample_step) / 8.0;
    if (t >= probe.impact_time) break;
    nodes.push_back(t);
  }
  const StepOutcome run = simulate_step(sys, x_star, ode, nodes);
  NominalTrajectory nom;
  nom.times = run.samples.times;
  nom.states = run.samples.states;
  nom.times.push_back(run.impact_time);
  nom.states.push_back(run.pre);
  for (std::size_t i = 0; i < nom.times.size(); ++i) {
    const double t = nom.times[i];
    nom.rates.push_back(sys.field(nom.states[i], t));
    nom.left_rates.push_back(sys.field(nom.states[i], i == 0 ? t : std::nextafter(t, -1.0)));
  }
  *period = run.impact_time;
  *pre = run.pre;
  return nom;
}

}  // namespace

GaitSpec synthesize_gait(const walker::WalkerParams& params, const TrajoptOptions& opts) {
  params.validate();
  const TrajoptResult tr = solve_shooting(params, opts);
  GaitSpec g = feedforward_gait(params, tr, opts);

  double residual = 0.0;
  {
    const auto sys = make_closed_loop(g);
    g.x_star = polish_fixed_point(*sys, g.x_star, opts.polish_tol, &residual);
  }
  g.fixed_point_residual = residual;
  if (!(residual <= opts.polish_tol))
    throw Error(ErrorKind::InfeasibleGait, "fixed-point polishing stalled at residual " + std::to_string(residual));

  const auto sys = make_closed_loop(g);
  g.nominal = nominal_from(*sys, g.x_star, g.sample_step, &g.period, &g.x_pre);
  g.k_ds = Eigen::VectorXd::Zero(4);
  g.k_track = Eigen::VectorXd::Zero(4);
  return g;
}

ParametricStep pre_impact_map(const GaitSpec& gait, const OdeOptions& opts) {
  GaitSpec open = gait;
  open.k_ds = Eigen::VectorXd::Zero(4);
  open.k_track = Eigen::VectorXd::Zero(4);
  auto sys = make_closed_loop(open);
  const walker::WalkerParams p = gait.params;
  return [sys, p, opts](const Eigen::VectorXd& x_pre, double v) {
    const Eigen::VectorXd post = walker::transformed_reset<double>(x_pre, v, p);
    return simulate_step(*sys, post, opts).pre;
  };
}

StepController design_step_controller(const GaitSpec& gait, const std::vector<double>& poles, const FdOptions& fd) {
  const AffineGuard guard = walker::transformed_guard(gait.params);
  const Eigen::Index n = guard.dim();
  if (static_cast<Eigen::Index>(poles.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "need one pole per state");
  std::vector<double> tangent = poles;
  const auto zero = std::find_if(tangent.begin(), tangent.end(), [](double p) { return std::abs(p) <= 1e-12; });
  if (zero == tangent.end())
    throw Error(ErrorKind::Uncontrollable, "the off-guard direction of the return map is a fixed zero pole; include 0");
  tangent.erase(zero);

  StepController out;
  out.linearization = step_jacobians(pre_impact_map(gait, tight_ode()), gait.x_pre, gait.v_ff, fd);
  const Eigen::MatrixXd& basis = guard.basis;
  const Eigen::MatrixXd proj = basis * basis.transpose();
  out.linearization.A = proj * out.linearization.A;
  out.linearization.B = proj * out.linearization.B;

  const Eigen::MatrixXd a_red = basis.transpose() * out.linearization.A * basis;
  const Eigen::VectorXd b_red = basis.transpose() * out.linearization.B;
  const Eigen::RowVectorXd k_red = pole_placement(a_red, b_red, tangent);
  out.k_ds = (k_red * basis.transpose()).transpose();

  const Eigen::MatrixXd closed = out.linearization.A + out.linearization.B * out.k_ds.transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> es(closed, false);
  out.closed_loop_eigenvalues = es.eigenvalues();

  std::vector<double> want = poles;
  std::sort(want.begin(), want.end());
  std::vector<std::complex<double>> got(out.closed_loop_eigenvalues.data(),
                                        out.closed_loop_eigenvalues.data() + out.closed_loop_eigenvalues.size());
  std::sort(got.begin(), got.end(), [](auto a, auto b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < want.size(); ++i)
    out.placement_error = std::max(out.placement_error, std::abs(got[i] - want[i]));
  return out;
}

Eigen::MatrixXd closed_loop_step_matrix(const GaitSpec& gait, const FdOptions& fd) {
  const auto sys = make_closed_loop(gait);
  const OdeOptions ode = tight_ode();
  return fd_jacobian([&](const Eigen::VectorXd& x) { return step_map(*sys, x, ode); }, gait.x_star, fd);
}

InitialShape initial_shape(const Eigen::MatrixXd& A_cl, double eps) {
  if (A_cl.rows() != A_cl.cols()) throw Error(ErrorKind::DimensionMismatch, "closed-loop step matrix must be square");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidState, "epsilon must be positive");
  const double rho = spectral_radius(A_cl);
  if (!(rho < 1.0))
    throw Error(ErrorKind::SpectralRadiusTooLarge, "closed-loop spectral radius " + std::to_string(rho) + " >= 1");
  const Eigen::Index n = A_cl.rows();
  InitialShape out;
  out.rate = rho + eps;
  const Eigen::MatrixXd a = A_cl / out.rate;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < 10000000; ++k) {
    P += term;
    term = a.transpose() * term * a;
    if (term.norm() < 1e-14) break;
  }
  P = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  P /= es.eigenvalues().minCoeff();
  es.compute(P);
  out.P = P;
  out.alpha = es.operatorSqrt();
  return out;
}

}  // namespace hytube
