#include <cmath>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "hytube/errors.hpp"
#include "hytube/gait.hpp"

namespace hytube {

namespace {

// Decision vector: [x0 (4), u_0..u_{N-1}, v].
class ShootingResiduals : public Eigen::DenseFunctor<double> {
 public:
  ShootingResiduals(const walker::WalkerParams& p, const TrajoptOptions& o)
      : Eigen::DenseFunctor<double>(5 + o.samples, 3 * o.samples + 7),
        p_(p),
        o_(o),
        guard_(walker::transformed_guard(p)),
        u_scale_(1.0 / (p.mass * p.gravity * std::sqrt(static_cast<double>(o.samples)))) {}

  double weight = 1.0;
  double objective = 1.0;  // 0 turns the solve into pure feasibility restoration

  struct Rollout {
    std::vector<Eigen::Vector4d> x;
    std::vector<Eigen::MatrixXd> sens;  // dx_i / dw
  };

  Rollout rollout(const Eigen::VectorXd& w, bool with_sens) const {
    const int n = o_.samples;
    const int nw = 5 + n;
    Rollout r;
    r.x.reserve(n + 1);
    r.x.emplace_back(w.head<4>());
    if (with_sens) {
      r.sens.emplace_back(Eigen::MatrixXd::Zero(4, nw));
      r.sens.back().leftCols<4>().setIdentity();
    }
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector4d& xi = r.x.back();
      const double ui = w(4 + i);
      Eigen::VectorXd xv = xi;
      r.x.emplace_back(xi + o_.step * walker::transformed_dynamics<double>(xv, ui, p_));
      if (with_sens) {
        Eigen::VectorXd arg(5);
        arg << xi, ui;
        const Eigen::MatrixXd jac = detail::point_jacobian(arg, [&](const Vec<DualD>& a) {
          return walker::transformed_dynamics<DualD>(a.head(4), a(4), p_);
        });
        Eigen::MatrixXd next = r.sens.back() + o_.step * jac.leftCols<4>() * r.sens.back();
        next.col(4 + i) += o_.step * jac.col(4);
        r.sens.push_back(std::move(next));
      }
    }
    return r;
  }

  int operator()(const Eigen::VectorXd& w, Eigen::VectorXd& fvec) const {
    fill(w, fvec, nullptr);
    return 0;
  }

  int df(const Eigen::VectorXd& w, Eigen::MatrixXd& fjac) const {
    Eigen::VectorXd fvec(values());
    fill(w, fvec, &fjac);
    return 0;
  }

  /// Largest constraint violation, unweighted.
  double violation(const Eigen::VectorXd& w) const {
    const Rollout r = rollout(w, false);
    const int n = o_.samples;
    double worst = 0.0;
    Eigen::VectorXd xn = r.x[n];
    const Eigen::VectorXd post = walker::transformed_reset<double>(xn, w(4 + n), p_);
    worst = std::max(worst, (post - w.head<4>()).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(guard_.value(xn)));
    for (int i = 0; i < n; ++i) worst = std::max(worst, -guard_.value(r.x[i]));
    for (int i = 0; i <= n; ++i) worst = std::max(worst, p_.leg_length - r.x[i](0));
    worst = std::max(worst, guard_rate(xn) + o_.transversality_margin);
    return worst;
  }

  double cost(const Eigen::VectorXd& w) const { return w.segment(4, o_.samples).squaredNorm(); }

 private:
  double guard_rate(const Eigen::Vector4d& x) const { return guard_.normal(0) * x(2) + guard_.normal(1) * x(3); }

  void fill(const Eigen::VectorXd& w, Eigen::VectorXd& fvec, Eigen::MatrixXd* fjac) const {
    const int n = o_.samples;
    const int nw = 5 + n;
    const Rollout r = rollout(w, fjac != nullptr);
    const double sw = std::sqrt(weight);
    fvec.setZero(values());
    if (fjac) fjac->setZero(values(), nw);
    int row = 0;

    for (int i = 0; i < n; ++i, ++row) {
      fvec(row) = objective * u_scale_ * w(4 + i);
      if (fjac) (*fjac)(row, 4 + i) = objective * u_scale_;
    }

    const Eigen::Vector4d& xn = r.x[n];
    const double v = w(4 + n);
    Eigen::VectorXd arg(5);
    arg << xn, v;
    const Eigen::VectorXd post = walker::transformed_reset<double>(arg.head(4), v, p_);
    for (int k = 0; k < 4; ++k) fvec(row + k) = sw * (post(k) - w(k));
    if (fjac) {
      const Eigen::MatrixXd jr = detail::point_jacobian(
          arg, [&](const Vec<DualD>& a) { return walker::transformed_reset<DualD>(a.head(4), a(4), p_); });
      Eigen::MatrixXd block = jr.leftCols<4>() * r.sens[n];
      block.col(4 + n) += jr.col(4);
      block.leftCols<4>() -= Eigen::Matrix4d::Identity();
      fjac->middleRows(row, 4) = sw * block;
    }
    row += 4;

    fvec(row) = sw * guard_.value(xn);
    if (fjac) fjac->row(row) = sw * guard_.normal.transpose() * r.sens[n];
    ++row;

    for (int i = 0; i < n; ++i, ++row) {
      const double h = guard_.value(r.x[i]);
      if (h < 0.0) {
        fvec(row) = -sw * h;
        if (fjac) fjac->row(row) = -sw * guard_.normal.transpose() * r.sens[i];
      }
    }
    for (int i = 0; i <= n; ++i, ++row) {
      const double gap = p_.leg_length - r.x[i](0);
      if (gap > 0.0) {
        fvec(row) = sw * gap;
        if (fjac) fjac->row(row) = -sw * r.sens[i].row(0);
      }
    }
    const double tr = guard_rate(xn) + o_.transversality_margin;
    if (tr > 0.0) {
      fvec(row) = sw * tr;
      if (fjac) fjac->row(row) = sw * (guard_.normal(0) * r.sens[n].row(2) + guard_.normal(1) * r.sens[n].row(3));
    }
  }

  walker::WalkerParams p_;
  TrajoptOptions o_;
  AffineGuard guard_;
  double u_scale_;
};

}  // namespace

TrajoptResult solve_shooting(const walker::WalkerParams& p, const TrajoptOptions& o) {
  if (o.samples < 2 || !(o.step > 0.0)) throw Error(ErrorKind::Config, "trajectory optimization needs samples >= 2 and step > 0");
  const int n = o.samples;
  const double period = n * o.step;
  const double th_minus = o.guess_angle;
  const double th_plus = p.hip_angle - th_minus;
  const double omega = (th_minus - th_plus) / period;

  Eigen::VectorXd w(5 + n);
  w.head<4>() << p.leg_length, std::tan(th_plus), 0.0, omega / (std::cos(th_plus) * std::cos(th_plus));
  w.segment(4, n).setConstant(p.mass * p.gravity);
  w(4 + n) = 1.0;

  ShootingResiduals fn(p, o);
  for (double weight : o.weights) {
    fn.weight = weight;
    Eigen::LevenbergMarquardt<ShootingResiduals> lm(fn);
    lm.setMaxfev(o.max_iterations);
    lm.setXtol(1e-14);
    lm.setFtol(1e-14);
    lm.setGtol(1e-14);
    lm.minimize(w);
  }
  const double penalty_violation = fn.violation(w);
  if (!std::isfinite(penalty_violation) || penalty_violation > o.feasibility_tol)
    throw Error(ErrorKind::InfeasibleGait,
                "penalty iterations stalled with constraint violation " + std::to_string(penalty_violation));

  fn.objective = 0.0;
  fn.weight = 1.0;
  {
    Eigen::LevenbergMarquardt<ShootingResiduals> lm(fn);
    lm.setMaxfev(o.max_iterations);
    lm.setXtol(1e-15);
    lm.setFtol(1e-15);
    lm.setGtol(0.0);
    lm.minimize(w);
  }

  TrajoptResult out;
  out.x0 = w.head<4>();
  out.u.assign(w.data() + 4, w.data() + 4 + n);
  out.v = w(4 + n);
  out.cost = fn.cost(w);
  out.penalty_violation = penalty_violation;
  out.violation = fn.violation(w);
  for (const auto& x : fn.rollout(w, false).x) out.states.emplace_back(x);
  if (!std::isfinite(out.violation) || out.violation > o.feasibility_tol)
    throw Error(ErrorKind::InfeasibleGait, "feasibility restoration failed: violation " + std::to_string(out.violation));
  return out;
}

}  // namespace hytube
