#include "hytube/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "hytube/errors.hpp"
#include "hytube/gait.hpp"

namespace hytube {

namespace {

Eigen::VectorXd gaussian_direction(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

std::vector<Eigen::VectorXd> map_ball(const NormotopeD& n, std::vector<Eigen::VectorXd> ball) {
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(n.shape());
  for (auto& u : ball) u = n.center() + n.offset() * lu.solve(u);
  return ball;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_boundary(const NormotopeD& n, std::size_t count, std::mt19937_64& rng) {
  std::vector<Eigen::VectorXd> ball;
  ball.reserve(count);
  for (std::size_t k = 0; k < count; ++k) ball.push_back(gaussian_direction(n.dim(), rng));
  return map_ball(n, std::move(ball));
}

std::vector<Eigen::VectorXd> sample_interior(const NormotopeD& n, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double inv_dim = 1.0 / static_cast<double>(n.dim());
  std::vector<Eigen::VectorXd> ball;
  ball.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd u = gaussian_direction(n.dim(), rng);
    ball.push_back(std::pow(unit(rng), inv_dim) * u);
  }
  return map_ball(n, std::move(ball));
}

std::size_t nearest_sample(const EmbeddingTrajectory& tube, double t) {
  if (tube.size() == 0) throw Error(ErrorKind::InvalidState, "empty tube");
  const auto it = std::lower_bound(tube.times.begin(), tube.times.end(), t);
  if (it == tube.times.end()) return tube.size() - 1;
  const auto i = static_cast<std::size_t>(it - tube.times.begin());
  if (i > 0 && t - tube.times[i - 1] < *it - t) return i - 1;
  return i;
}

double tube_ratio(const EmbeddingTrajectory& tube, std::size_t index, const Eigen::VectorXd& x) {
  return normalized_distance(tube.states.at(index), x);
}

TubeCheck check_step_in_tube(const HybridSystem& sys, const EmbeddingTrajectory& tube, const Eigen::VectorXd& x0,
                             const OdeOptions& ode) {
  const StepOutcome step = simulate_step(sys, x0, ode, tube.times);
  TubeCheck out;
  out.impact_time = step.impact_time;
  out.post = step.post;
  for (std::size_t k = 0; k < step.samples.times.size(); ++k) {
    const std::size_t i = nearest_sample(tube, step.samples.times[k]);
    out.worst_ratio = std::max(out.worst_ratio, tube_ratio(tube, i, step.samples.states[k]));
  }
  out.escaped = out.worst_ratio > 1.0 + kTubeSlack || step.impact_time > tube.times.back();
  return out;
}

MonteCarloReport run_montecarlo(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha,
                                const EmbeddingTrajectory& tube, const MonteCarloOptions& opts) {
  if (!(opts.inflation > 0.0)) throw Error(ErrorKind::Config, "Monte Carlo inflation must be positive");
  std::mt19937_64 rng(opts.seed);
  const NormotopeD start(x_star, alpha / opts.inflation, 1.0);
  const std::vector<Eigen::VectorXd> initial = sample_boundary(start, opts.n_traj, rng);

  MonteCarloReport report;
  report.trajectories.resize(initial.size());
  for (std::size_t j = 0; j < initial.size(); ++j) {
    TrajectoryReport& tr = report.trajectories[j];
    tr.index = j;
    Eigen::VectorXd x = initial[j];
    try {
      for (std::size_t c = 0; c < opts.n_crossings; ++c) {
        const TubeCheck check = check_step_in_tube(sys, tube, x, opts.ode);
        const double post_norm = (alpha * (check.post - x_star)).norm();
        tr.max_tube_ratio = std::max(tr.max_tube_ratio, check.worst_ratio);
        tr.max_post_norm = std::max(tr.max_post_norm, post_norm);
        tr.escaped = tr.escaped || check.escaped || post_norm > 1.0 + kTubeSlack;
        x = check.post;
        ++tr.crossings;
      }
    } catch (const Error& e) {
      tr.failure = e.what();
    }
    if (tr.escaped) ++report.escapes;
    if (!tr.failure.empty()) ++report.failures;
    report.max_post_norm = std::max(report.max_post_norm, tr.max_post_norm);
  }
  return report;
}

}  // namespace hytube
