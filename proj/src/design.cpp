#include <cmath>
#include <limits>

#include "hytube/errors.hpp"
#include "hytube/gait.hpp"

namespace hytube {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GaitSpec with_gain(const GaitSpec& gait, const Eigen::VectorXd& gain) {
  GaitSpec g = gait;
  g.k_track = gain;
  return g;
}

double phi_of(const VerificationResult& r) {
  if (!r.failure.empty() || !(r.cond_a && r.cond_b && r.cond_c && r.cond_d)) return kInf;
  return r.gamma;
}

VerifyOptions inner_options(VerifyOptions o) {
  o.check_fixed_point = false;
  return o;
}

struct Gradient {
  Eigen::VectorXd value;
  double consistency = kInf;
};

Gradient fd_gradient(const std::function<double(const Eigen::VectorXd&)>& phi, const Eigen::VectorXd& k,
                     double step, double check_step) {
  const Eigen::Index n = k.size();
  Eigen::VectorXd fine(n), coarse(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto diff = [&](double h) {
      Eigen::VectorXd kp = k, km = k;
      kp(j) += h;
      km(j) -= h;
      return (phi(kp) - phi(km)) / (2.0 * h);
    };
    fine(j) = diff(step);
    coarse(j) = diff(check_step);
  }
  Gradient g;
  g.value = fine;
  if (fine.allFinite() && coarse.allFinite())
    g.consistency = (fine - coarse).norm() / std::max(fine.norm(), std::numeric_limits<double>::min());
  return g;
}

}  // namespace

double phi_prime(const GaitSpec& gait, const Eigen::MatrixXd& alpha, const Eigen::VectorXd& gain,
                 const VerifyOptions& opts) {
  const auto sys = make_closed_loop(with_gain(gait, gain));
  return phi_of(verify_at_scale(*sys, gait.x_star, alpha, 1.0, inner_options(opts)));
}

DesignResult design_tracking_gain(const GaitSpec& gait, const Eigen::MatrixXd& alpha0, const DesignOptions& opts,
                                  const std::function<void(const DesignStep&)>& on_step) {
  const VerifyOptions vopts = inner_options(opts.verify);
  auto phi = [&](const Eigen::MatrixXd& alpha, const Eigen::VectorXd& k) { return phi_prime(gait, alpha, k, vopts); };

  DesignResult out;
  out.gain = Eigen::VectorXd::Zero(4);
  out.alpha = alpha0;
  double current = phi(out.alpha, out.gain);
  out.baseline_phi = current;
  if (!(current <= 1.0)) throw Error(ErrorKind::InvalidState, "design needs a verified starting shape");

  auto record = [&](int outer, int inner, double eta, double consistency) {
    DesignStep s{outer, inner, out.gain, current, eta, consistency};
    out.history.push_back(s);
    if (on_step) on_step(s);
  };
  record(0, 0, opts.eta, 0.0);

  int accepted_total = 0;
  double s_star = kInf;
  for (int outer = 1; outer <= opts.max_outer && s_star > opts.s_min; ++outer) {
    for (int inner = 1; inner <= opts.gradient_steps; ++inner) {
      double eta = opts.eta;
      const Gradient grad = fd_gradient([&](const Eigen::VectorXd& k) { return phi(out.alpha, k); }, out.gain,
                                        opts.fd_step, opts.fd_check_step);
      if (!(grad.consistency <= opts.fd_tolerance)) {
        out.stalled = true;
        break;
      }
      bool accepted = false;
      for (int rejections = 0; rejections < opts.max_rejections; ++rejections) {
        const Eigen::VectorXd trial = out.gain - eta * grad.value;
        const double value = phi(out.alpha, trial);
        if (value <= current) {
          out.gain = trial;
          current = value;
          accepted = true;
          ++accepted_total;
          record(outer, inner, eta, grad.consistency);
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) {
        out.stalled = true;
        break;
      }
    }

    const auto sys = make_closed_loop(with_gain(gait, out.gain));
    const RescaleResult rr = rescale_bisection(
        [&](double s) { return verify_at_scale(*sys, gait.x_star, out.alpha, s, vopts); }, opts.s_tol);
    s_star = rr.scale;
    out.alpha /= s_star;
    out.enlargement *= s_star;
    out.scales.push_back(s_star);
    out.certificate = rr.result;
    current = phi_of(rr.result);
  }
  if (accepted_total == 0 && out.enlargement <= 1.0)
    throw Error(ErrorKind::DivergentDescent, "no descent step on the tracking gain was ever accepted");
  return out;
}

}  // namespace hytube
