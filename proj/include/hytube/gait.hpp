#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "hytube/ode.hpp"
#include "hytube/system.hpp"
#include "hytube/verify.hpp"
#include "hytube/walker.hpp"

namespace hytube {

/// Nominal closed-loop trajectory over one step, as cubic Hermite nodes.
struct NominalTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> rates;       // right limits of x'
  std::vector<Eigen::VectorXd> left_rates;  // left limits of x'

  /// Clamped to the node range.
  Eigen::VectorXd at(double t) const;
};

struct GaitSpec {
  walker::WalkerParams params;
  Eigen::VectorXd x_star;  // post-impact fixed point
  double period = 0.0;     // time to impact from x_star
  double sample_step = 0.0;
  std::vector<double> u_ff;  // held on [k h, (k+1) h)
  double v_ff = 0.0;
  Eigen::VectorXd x_pre;  // nominal pre-impact state
  Eigen::VectorXd k_ds;   // impulse gain on x_pre deviations
  Eigen::VectorXd k_track;
  NominalTrajectory nominal;

  double trajopt_cost = 0.0;
  double trajopt_violation = 0.0;
  double fixed_point_residual = 0.0;
};

/// Walker with tracking control u = u_ff + K (x - x_d) on the phase since
/// the last reset, and impulse v = v_ff + K_ds (x - x_pre) at impact.
class WalkerClosedLoop {
 public:
  explicit WalkerClosedLoop(const GaitSpec& gait);

  int dim() const { return 4; }
  AffineGuard guard() const { return walker::transformed_guard(params_); }
  std::vector<double> breakpoints() const { return breakpoints_; }

  double feedforward(double t) const {
    const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return u_ff_[static_cast<std::size_t>(it - breakpoints_.begin())];
  }

  template <typename S>
  Vec<S> flow(const Vec<S>& x, double t) const {
    const double phase = std::clamp(t, 0.0, period_);
    S u(feedforward(phase));
    if (tracking_) {
      const Eigen::VectorXd xd = nominal_->at(phase);
      for (int j = 0; j < 4; ++j)
        if (k_track_(j) != 0.0) u = u + S(k_track_(j)) * (x(j) - S(xd(j)));
    }
    return walker::transformed_dynamics<S>(x, u, params_);
  }

  template <typename S>
  Vec<S> jump(const Vec<S>& x) const {
    S v(v_ff_);
    for (int j = 0; j < 4; ++j)
      if (k_ds_(j) != 0.0) v = v + S(k_ds_(j)) * (x(j) - S(x_pre_(j)));
    return walker::transformed_reset<S>(x, v, params_);
  }

 private:
  walker::WalkerParams params_;
  double period_;
  std::vector<double> breakpoints_;
  std::vector<double> u_ff_;
  double v_ff_;
  Eigen::VectorXd x_pre_;
  Eigen::VectorXd k_ds_;
  Eigen::VectorXd k_track_;
  bool tracking_;
  std::shared_ptr<const NominalTrajectory> nominal_;
};

std::shared_ptr<const HybridSystem> make_closed_loop(const GaitSpec& gait);

struct StepOutcome {
  Eigen::VectorXd pre;  // state at impact
  double impact_time = 0.0;
  Eigen::VectorXd post;
  FlowSamples samples;
};

/// One hybrid step: flow to the guard, then reset.
StepOutcome simulate_step(const HybridSystem& sys, const Eigen::VectorXd& x0, const OdeOptions& opts = {},
                          const std::vector<double>& sample_times = {});
Eigen::VectorXd step_map(const HybridSystem& sys, const Eigen::VectorXd& x, const OdeOptions& opts = {});

struct StepLinearization {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  double richardson = 0.0;  // relative gap between the two FD step sizes
};

struct FdOptions {
  double step = 1e-6;
  double check_step = 1e-5;
  double tolerance = 1e-4;
};

using ParametricStep = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double v)>;

/// Central differences of F in x and v at (x, v), checked against a second
/// step size. Throws FiniteDifferenceInconsistent.
StepLinearization step_jacobians(const ParametricStep& F, const Eigen::VectorXd& x, double v,
                                 const FdOptions& opts = {});

/// Central-difference Jacobian of a map with the same step-size check.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F, const Eigen::VectorXd& x,
                            const FdOptions& opts = {}, double* richardson = nullptr);

/// Ackermann: K with eig(A + B K) = poles. Throws Uncontrollable.
Eigen::RowVectorXd pole_placement(const Eigen::MatrixXd& A, const Eigen::VectorXd& B, const std::vector<double>& poles);

double spectral_radius(const Eigen::MatrixXd& A);

struct TrajoptOptions {
  int samples = 100;
  double step = 0.004;
  double guess_angle = 0.35;  // pre-impact stance angle of the initial guess
  std::vector<double> weights{1e2, 1e4, 1e6};
  double transversality_margin = 1e-3;
  double feasibility_tol = 1e-4;
  double polish_tol = 1e-8;
  int max_iterations = 2000;
};

struct TrajoptResult {
  Eigen::Vector4d x0;
  std::vector<double> u;
  double v = 0.0;
  std::vector<Eigen::VectorXd> states;  // Euler samples x_0..x_N
  double cost = 0.0;                    // sum of u_i^2
  double penalty_violation = 0.0;       // after the last penalty weight
  double violation = 0.0;               // after feasibility restoration
};

/// Minimizes sum u_i^2 over (x0, u, v) subject to the Euler rollout being
/// periodic through the reset, ending on the guard with h' < 0, staying off
/// the guard and keeping r >= r0. Penalty weights are raised in turn with a
/// Levenberg-Marquardt inner solve; a final constraint-only solve removes the
/// residual penalty violation. Throws InfeasibleGait.
TrajoptResult solve_shooting(const walker::WalkerParams& params, const TrajoptOptions& opts = {});

/// Periodic gait by single shooting on the Euler-discretized transformed
/// dynamics, then Newton polishing of x* on the event-detected step map.
/// Fills everything except k_ds (zero) and k_track (zero).
GaitSpec synthesize_gait(const walker::WalkerParams& params, const TrajoptOptions& opts = {});

/// Pre-impact return map x_pre -> next pre-impact state under impulse v,
/// with feedforward control only.
ParametricStep pre_impact_map(const GaitSpec& gait, const OdeOptions& opts);

struct StepController {
  Eigen::VectorXd k_ds;
  StepLinearization linearization;
  Eigen::VectorXcd closed_loop_eigenvalues;
  double placement_error = 0.0;
};

/// Places the step-to-step poles. The return map is linearized on the guard:
/// its off-guard direction is structurally a zero pole, so `poles` must
/// contain 0 and the others are placed on the guard tangent space.
StepController design_step_controller(const GaitSpec& gait, const std::vector<double>& poles,
                                      const FdOptions& fd = {});

/// Jacobian at x* of the closed-loop post-impact step map.
Eigen::MatrixXd closed_loop_step_matrix(const GaitSpec& gait, const FdOptions& fd = {});

struct InitialShape {
  Eigen::MatrixXd alpha;
  Eigen::MatrixXd P;
  double rate = 0.0;  // b
};

/// alpha0 = P^{1/2} with P a normalized discrete Lyapunov series solution of
/// A^T P A <= b^2 P. Throws SpectralRadiusTooLarge if rho(A) >= 1.
InitialShape initial_shape(const Eigen::MatrixXd& A_cl, double eps = 0.4);

struct DesignOptions {
  double eta = 0.5;
  int gradient_steps = 20;
  double s_min = 1.01;
  double fd_step = 1e-4;
  double fd_check_step = 2e-4;
  double fd_tolerance = 1e-3;
  int max_rejections = 5;
  int max_outer = 50;
  double s_tol = 1e-3;
  VerifyOptions verify;
};

struct DesignStep {
  int outer = 0;
  int inner = 0;
  Eigen::VectorXd gain;
  double phi = 0.0;
  double eta = 0.0;
  double fd_consistency = 0.0;
};

struct DesignResult {
  Eigen::VectorXd gain;
  Eigen::MatrixXd alpha;
  double enlargement = 1.0;
  double baseline_phi = 0.0;
  std::vector<DesignStep> history;  // accepted steps, starting with K = 0
  std::vector<double> scales;       // s* per outer iteration
  VerificationResult certificate;
  bool stalled = false;
};

/// gamma of the tube started at N<x*, alpha, 1> with tracking gain K, or
/// infinity if any other certificate condition fails.
double phi_prime(const GaitSpec& gait, const Eigen::MatrixXd& alpha, const Eigen::VectorXd& gain,
                 const VerifyOptions& opts = {});

/// Alternates N gradient steps on phi_prime in K with a rescale of alpha
/// until the rescale factor drops to s_min. Starts from K = 0 and a verified
/// alpha.
DesignResult design_tracking_gain(const GaitSpec& gait, const Eigen::MatrixXd& alpha0, const DesignOptions& opts = {},
                                  const std::function<void(const DesignStep&)>& on_step = {});

}  // namespace hytube
