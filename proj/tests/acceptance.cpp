#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <Eigen/Eigenvalues>

#include "hytube/gait.hpp"
#include "hytube/io.hpp"
#include "hytube/montecarlo.hpp"
#include "hytube/pipeline.hpp"
#include "models.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hytube;
using namespace hytube::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs fn, turning any exception into a FAIL line.
void criterion(int id, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

struct Setup {
  RunConfig cfg;
  StepController controller;
  GaitSpec gait;
  std::shared_ptr<const HybridSystem> sys;
  Baseline base;
  double verify_seconds = 0.0;
  Eigen::MatrixXd alpha() const { return base.shape.alpha / base.rescale.scale; }
};

}  // namespace

int main() {
  criterion(1, [] {
    Rng rng(101);
    const auto t0 = Clock::now();
    int violations = 0, mismatches = 0, nonempty = 0;
    for (int inst = 0; inst < 100; ++inst) {
      const int d = uniform_int(rng, 2, 6);
      const NormotopeD n = random_normotope(rng, d);
      const Eigen::VectorXd a = uniform_vector(rng, d, -1, 1);
      const double b = -a.dot(n.center()) + uniform(rng, -0.5, 0.5);
      const SliceOracleReport rep = slice_oracle(n, AffineGuard(a, b), rng, 1000);
      violations += rep.violations;
      mismatches += rep.empty_mismatch ? 1 : 0;
      if (rep.checked > 0) ++nonempty;
    }
    const double secs = seconds_since(t0);
    report(1, violations == 0 && mismatches == 0 && secs < 10.0,
           fmt("slice oracle: 100 instances (%d nonempty), %d violations, %d emptiness mismatches, %.2f s",
               nonempty, violations, mismatches, secs));
  });

  Setup s;
  const auto t_setup = Clock::now();
  try {
    s.gait = synthesize_controlled_gait(s.cfg, &s.controller);
    s.sys = make_closed_loop(s.gait);
    const auto t0 = Clock::now();
    s.base = verify_baseline(s.gait, s.cfg);
    s.verify_seconds = seconds_since(t0);
  } catch (const std::exception& e) {
    std::printf("setup failed: %s\n", e.what());
    for (int id = 2; id <= 8; ++id) report(id, false, "no baseline");
    return failures;
  }
  std::printf("baseline: synthesis and verification %.1f s, scale %.6g, gamma %.6g\n", seconds_since(t_setup),
              s.base.rescale.scale, s.base.rescale.result.gamma);

  criterion(2, [&] {
    // walker: sampled interior points stay in the tube until impact
    const VerificationResult& r = s.base.rescale.result;
    Rng rng(102);
    const NormotopeD n0(s.gait.x_star, s.alpha(), 1.0);
    int escapes = 0;
    double worst = 0.0;
    for (const Eigen::VectorXd& x : sample_interior(n0, 1000, rng)) {
      const TubeCheck c = check_step_in_tube(*s.sys, r.tube, x, s.cfg.ode());
      worst = std::max(worst, c.worst_ratio);
      if (c.escaped) ++escapes;
    }

    // linear system: the offset never moves
    AffineModel lin;
    lin.A.resize(2, 2);
    lin.A << -0.5, 2.0, -2.0, -0.5;
    lin.c = Eigen::Vector2d(0.1, -0.2);
    lin.a = Eigen::Vector2d(1, 0);
    lin.b = 100.0;
    lin.L = Eigen::Matrix2d::Identity();
    lin.d = Eigen::Vector2d::Zero();
    const auto lsys = make_system(lin);
    const NormotopeD l0(Eigen::Vector2d(1, 0), random_shape(rng, 2), 0.5);
    const EmbeddingTrajectory lt =
        embed_flow(l0, *lsys, [](const EmbeddingTrajectory& tr) { return tr.times.back() >= 1.0 - 1e-12; }, {});
    double drift = 0.0;
    for (const NormotopeD& n : lt.states) drift = std::max(drift, std::abs(n.offset() - l0.offset()));

    report(2, escapes == 0 && drift == 0.0,
           fmt("walker tube: %d/1000 escapes, worst ratio %.9f; linear offset drift %.3g over %zu samples", escapes,
               worst, drift, lt.size()));
  });

  criterion(3, [&] {
    const VerificationResult& r = s.base.rescale.result;
    Rng rng(103);
    const GammaOracleReport rep = gamma_oracle(*s.sys, r, s.alpha(), s.gait.x_star, rng, 10000);
    report(3, r.verified && r.gamma <= 1.0 && rep.violations == 0 && rep.checked == 10000,
           fmt("baseline verified %d, gamma %.9f, oracle worst %.9f, %d/%d violations", r.verified ? 1 : 0, r.gamma,
               rep.worst, rep.violations, rep.checked));
  });

  criterion(4, [&] {
    MonteCarloOptions o = s.cfg.montecarlo();
    const auto t0 = Clock::now();
    const MonteCarloReport rep = run_montecarlo(*s.sys, s.gait.x_star, s.alpha(), s.base.rescale.result.tube, o);
    report(4, rep.escapes == 0 && rep.failures == 0,
           fmt("monte carlo %zu x %zu: %zu escapes, %zu failures, max post-step norm %.6f, %.1f s", o.n_traj,
               o.n_crossings, rep.escapes, rep.failures, rep.max_post_norm, seconds_since(t0)));
  });

  DesignResult design;
  bool designed = false;
  criterion(5, [&] {
    const auto t0 = Clock::now();
    design = design_tracking_gain(s.gait, s.alpha(), s.cfg.design(), [](const DesignStep& st) {
      std::printf("  design outer %d inner %d phi %.6f eta %.4g\n", st.outer, st.inner, st.phi, st.eta);
      std::fflush(stdout);
    });
    designed = true;
    const double secs = seconds_since(t0);
    std::string scales;
    for (double x : design.scales) scales += fmt(" %.5f", x);
    report(5, design.enlargement >= 2.0 && design.certificate.verified && secs <= 1800.0,
           fmt("enlargement %.5f (scales%s), stalled %d, verified %d, %.1f s", design.enlargement, scales.c_str(),
               design.stalled ? 1 : 0, design.certificate.verified ? 1 : 0, secs));
  });

  report(6, s.verify_seconds < 60.0, fmt("baseline verification %.1f s", s.verify_seconds));

  criterion(7, [&] {
    const Eigen::MatrixXd& A = s.base.A_cl;
    const InitialShape& sh = s.base.shape;
    const Eigen::MatrixXd lhs = A.transpose() * sh.P * A - sh.rate * sh.rate * sh.P;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lhs + lhs.transpose()));
    const double lyap = es.eigenvalues().maxCoeff();
    const double p_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sh.P).eigenvalues().minCoeff();
    double fd = 0.0;
    if (designed)
      for (const DesignStep& st : design.history) fd = std::max(fd, st.fd_consistency);
    const bool pass = s.gait.fixed_point_residual <= 1e-8 && s.controller.placement_error <= 1e-8 && lyap <= 1e-10 &&
                      p_min >= 1.0 - 1e-10 && fd <= 1e-3 && designed;
    report(7, pass,
           fmt("fixed-point residual %.3g, placement error %.3g, Lyapunov lambda_max %.3g, lambda_min(P) %.12f, "
               "fd consistency %.3g (%zu accepted steps)",
               s.gait.fixed_point_residual, s.controller.placement_error, lyap, p_min, fd,
               designed ? design.history.size() - 1 : 0));
  });

  criterion(8, [&] {
    MonteCarloOptions o = s.cfg.montecarlo();
    o.n_traj = 20;
    o.inflation = 10.0;
    const MonteCarloReport rep = run_montecarlo(*s.sys, s.gait.x_star, s.alpha(), s.base.rescale.result.tube, o);
    report(8, rep.escapes >= 1,
           fmt("10x inflated starts, %zu x %zu: %zu escapes", o.n_traj, o.n_crossings, rep.escapes));
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
