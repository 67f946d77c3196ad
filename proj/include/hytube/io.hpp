#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hytube/gait.hpp"
#include "hytube/montecarlo.hpp"
#include "hytube/verify.hpp"

namespace hytube {

/// Every knob of a run. Parsed from flat `key = value` text; unknown keys and
/// bad values are Config errors naming the key.
struct RunConfig {
  walker::WalkerParams walker;
  TrajoptOptions trajopt;
  std::vector<double> poles{0.0, 0.1, 0.2, 0.3};
  double shape_eps = 0.4;
  double h_embed = 1e-4;
  double h_sim = 0.02;  // largest reference-integrator step
  double ode_tol = 1e-10;
  double event_tol = 1e-10;
  double s_tol = 1e-3;
  double fd_step = 1e-6;
  double fd_check_step = 1e-5;
  double fd_tolerance = 1e-4;
  double grad_step = 1e-4;
  double grad_check_step = 2e-4;
  double grad_tolerance = 1e-3;
  double eta = 0.5;
  int n_grad = 20;
  double s_min = 1.01;
  int max_outer = 50;
  std::size_t n_traj = 100;
  std::size_t n_crossings = 15;
  double mc_inflation = 1.0;
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  OdeOptions ode() const;
  FdOptions fd() const;
  VerifyOptions verify() const;
  DesignOptions design() const;
  MonteCarloOptions montecarlo() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
/// Every key with its resolved value, in parse_config syntax.
std::string format_config(const RunConfig& c);

std::string gait_to_json(const GaitSpec& g);
GaitSpec gait_from_json(const std::string& text);

/// What a verify or design run certifies: the tube N<x*, alpha0 / scale, 1>
/// under tracking gain k_track.
struct Certificate {
  Eigen::VectorXd x_star;
  Eigen::MatrixXd alpha0;
  double scale = 1.0;
  Eigen::VectorXd k_track;
  double gamma = 0.0;
  double t_under = 0.0;
  double t_over = 0.0;
  bool cond_a = false;
  bool cond_b = false;
  bool cond_c = false;
  bool cond_d = false;
  bool verified = false;
  std::string failure;

  Eigen::MatrixXd alpha() const { return alpha0 / scale; }
};

Certificate make_certificate(const VerificationResult& r, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                             const Eigen::VectorXd& k_track);
std::string certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const std::string& text);

/// Columns: t, c_1..c_n, a_11..a_nn (row-major), y, slice_nonempty,
/// slice_radius.
void write_tube_csv(std::ostream& out, const VerificationResult& r);
EmbeddingTrajectory read_tube_csv(std::istream& in);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace hytube
