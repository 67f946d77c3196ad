#include "hytube/pipeline.hpp"

namespace hytube {

GaitSpec synthesize_controlled_gait(const RunConfig& cfg, StepController* controller) {
  GaitSpec gait = synthesize_gait(cfg.walker, cfg.trajopt);
  StepController sc = design_step_controller(gait, cfg.poles, cfg.fd());
  gait.k_ds = sc.k_ds;
  if (controller) *controller = std::move(sc);
  return gait;
}

Baseline verify_baseline(const GaitSpec& gait, const RunConfig& cfg) {
  Baseline b;
  b.A_cl = closed_loop_step_matrix(gait, cfg.fd());
  b.shape = initial_shape(b.A_cl, cfg.shape_eps);
  const auto sys = make_closed_loop(gait);
  b.rescale = rescale_bisection(*sys, gait.x_star, b.shape.alpha, cfg.s_tol, cfg.verify());
  return b;
}

VerificationResult reverify(const GaitSpec& gait, const Certificate& cert, const RunConfig& cfg) {
  GaitSpec g = gait;
  g.k_track = cert.k_track;
  const auto sys = make_closed_loop(g);
  VerifyOptions opts = cfg.verify();
  opts.check_fixed_point = false;
  return verify_at_scale(*sys, cert.x_star, cert.alpha0, cert.scale, opts);
}

}  // namespace hytube
