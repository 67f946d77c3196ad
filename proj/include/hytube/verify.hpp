#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hytube/guard.hpp"
#include "hytube/interval.hpp"
#include "hytube/linclusion.hpp"
#include "hytube/normotope.hpp"
#include "hytube/system.hpp"

namespace hytube {

/// Intersection of a normotope with a guard hyperplane, in the guard's basis
/// coordinates: {z : |R (z - center)|_2 <= radius}, embedded by z -> Bz + x'.
struct SlicedNormotope {
  Eigen::VectorXd center;
  Eigen::MatrixXd R;  // upper triangular
  double radius = 0.0;
  double slack = 0.0;  // r, with radius^2 = y^2 - r
  double time = 0.0;
  std::size_t index = 0;
};

/// Empty when the hyperplane misses the set. Throws DegenerateSlice if
/// shape * basis loses rank.
std::optional<SlicedNormotope> slice(const NormotopeD& n, const AffineGuard& g, double time = 0.0,
                                     std::size_t index = 0);

enum class Side { Above, Below };

/// Strict: the whole set lies in h > 0 (Above) or h < 0 (Below).
bool check_sign_condition(const NormotopeD& n, const AffineGuard& g, Side want);

/// Boxes around a nonempty slice, in guard coordinates and in state space.
IntervalVector slice_zbox(const SlicedNormotope& s);
IntervalVector slice_box(const SlicedNormotope& s, const AffineGuard& g);

using BoxEnclosure = std::function<IntervalVector(const IntervalVector&)>;

/// Enclosure of h'(x) = a^T f(x) over the embedded slice.
IntervalD transversality_range(const SlicedNormotope& s, const AffineGuard& g, const BoxEnclosure& field);

/// Reset restricted to the guard, z -> reset(Bz + x').
struct GuardReset {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  DerivativeEnclosure derivs;
};

GuardReset restrict_reset(const HybridSystem& sys);

/// Reset-gain bound over one slice.
double slice_gamma(const SlicedNormotope& s, const GuardReset& reset, const Eigen::MatrixXd& alpha0,
                   const Eigen::VectorXd& x_star, std::size_t cap = kDefaultCornerCap);

/// Sup of slice_gamma over the slices; 0 for an empty list.
double gamma_bound(const std::vector<SlicedNormotope>& slices, const GuardReset& reset, const Eigen::MatrixXd& alpha0,
                   const Eigen::VectorXd& x_star, std::size_t cap = kDefaultCornerCap);

struct Window {
  std::size_t under = 0;
  std::size_t over = 0;
};

/// `over` is the first sample entirely below the guard; `under` the latest
/// sample entirely above it before the tube center first goes below.
Window find_window(const EmbeddingTrajectory& traj, const AffineGuard& g);

struct VerifyOptions {
  EmbedOptions embed;
  // The tube is re-embedded from the last fully-above sample with halved
  // steps until the guard window holds this many samples.
  std::size_t min_window_samples = 8;
  int max_window_refinements = 6;
  double fixed_point_tol = 1e-6;
  bool check_fixed_point = true;
};

struct VerificationResult {
  double scale = 1.0;
  double t_under = 0.0;
  double t_over = 0.0;
  Window window;
  std::vector<SlicedNormotope> intersections;         // nonempty slices in the window
  std::vector<std::optional<SlicedNormotope>> slices;  // one per tube sample
  double gamma = std::numeric_limits<double>::infinity();
  bool cond_a = false;
  bool cond_b = false;
  bool cond_c = false;
  bool cond_d = false;
  bool verified = false;
  std::string failure;  // set when the pipeline itself could not run
  EmbeddingTrajectory tube;
};

/// Embeds the tube from N<x*, alpha0, 1> through one step and checks the
/// forward-invariance conditions.
VerificationResult verify_tube(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                               const VerifyOptions& opts = {});

/// verify_tube on alpha0 / s. Failures that mean "no certificate at this
/// scale" are reported in the result instead of thrown.
VerificationResult verify_at_scale(const HybridSystem& sys, const Eigen::VectorXd& x_star,
                                   const Eigen::MatrixXd& alpha0, double s, const VerifyOptions& opts = {});

using ScaleVerifier = std::function<VerificationResult(double)>;

struct RescaleResult {
  double scale = 0.0;
  VerificationResult result;
  int evaluations = 0;
};

inline constexpr double kMinScale = 1.0 / (1 << 20);
inline constexpr double kMaxScale = 1 << 20;

/// Largest s with verify(s).verified, by exponential bracketing from s = 1
/// followed by bisection to relative tolerance s_tol. The returned scale is
/// re-verified before returning.
RescaleResult rescale_bisection(const ScaleVerifier& verify, double s_tol = 1e-3);
RescaleResult rescale_bisection(const HybridSystem& sys, const Eigen::VectorXd& x_star, const Eigen::MatrixXd& alpha0,
                                double s_tol = 1e-3, const VerifyOptions& opts = {});

}  // namespace hytube
