#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hytube/normotope.hpp"
#include "hytube/ode.hpp"
#include "hytube/system.hpp"

namespace hytube {

/// Uniform on the boundary of n: normalized Gaussian directions mapped
/// through the shape.
std::vector<Eigen::VectorXd> sample_boundary(const NormotopeD& n, std::size_t count, std::mt19937_64& rng);

/// Uniform in the volume of n.
std::vector<Eigen::VectorXd> sample_interior(const NormotopeD& n, std::size_t count, std::mt19937_64& rng);

/// Index of the tube sample closest in time to t.
std::size_t nearest_sample(const EmbeddingTrajectory& tube, double t);

/// ||alpha (x - c)|| / y at the given tube sample.
double tube_ratio(const EmbeddingTrajectory& tube, std::size_t index, const Eigen::VectorXd& x);

inline constexpr double kTubeSlack = 1e-6;

struct TubeCheck {
  bool escaped = false;
  double worst_ratio = 0.0;  // max over checked samples of tube_ratio
  double impact_time = 0.0;
  Eigen::VectorXd post;
};

/// One hybrid step from x0, checked against the tube at every tube sample
/// time before impact. Impacting after the last tube sample counts as an
/// escape.
TubeCheck check_step_in_tube(const HybridSystem& sys, const EmbeddingTrajectory& tube, const Eigen::VectorXd& x0,
                             const OdeOptions& ode = {});

struct MonteCarloOptions {
  std::size_t n_traj = 100;
  std::size_t n_crossings = 15;
  std::uint64_t seed = 1;
  // Initial points are drawn on the boundary of N<x*, alpha / inflation, 1>.
  double inflation = 1.0;
  OdeOptions ode;
};

struct TrajectoryReport {
  std::size_t index = 0;
  bool escaped = false;
  std::size_t crossings = 0;     // completed steps
  double max_tube_ratio = 0.0;   // over all steps
  double max_post_norm = 0.0;    // ||alpha (F(x) - x*)||
  std::string failure;           // simulation error, if any
};

struct MonteCarloReport {
  std::vector<TrajectoryReport> trajectories;  // by index
  std::size_t escapes = 0;
  std::size_t failures = 0;
  double max_post_norm = 0.0;
};

/// Simulates n_crossings steps from each boundary sample. A trajectory
/// escapes when it leaves the tube (slack kTubeSlack * y) or lands outside
/// N<x*, alpha, 1> after a reset.
MonteCarloReport run_montecarlo(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha,
                                const EmbeddingTrajectory& tube, const MonteCarloOptions& opts = {});

}  // namespace hytube
