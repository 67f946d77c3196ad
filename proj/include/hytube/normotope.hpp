#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hytube/errors.hpp"
#include "hytube/interval.hpp"
#include "hytube/linclusion.hpp"
#include "hytube/system.hpp"

namespace hytube {

inline constexpr double kMinReciprocalCondition = 1e-12;

/// Reciprocal 2-norm condition number sigma_min / sigma_max.
double reciprocal_condition(const Eigen::MatrixXd& a);

/// l2 normotope {x : |shape (x - center)|_2 <= offset}, i.e. an ellipsoid.
template <typename Scalar = double>
class Normotope {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Normotope() = default;
  Normotope(Vector center, Matrix shape, Scalar offset)
      : center_(std::move(center)), shape_(std::move(shape)), offset_(offset) {
    if (shape_.rows() != shape_.cols() || shape_.rows() != center_.size())
      throw Error(ErrorKind::DimensionMismatch, "normotope shape must be square and match the center");
    if (!(offset_ > Scalar(0))) throw Error(ErrorKind::InvalidState, "normotope offset must be positive");
    if (!(reciprocal_condition(shape_) >= kMinReciprocalCondition))
      throw Error(ErrorKind::SingularShape, "normotope shape is singular or ill-conditioned");
  }

  const Vector& center() const { return center_; }
  const Matrix& shape() const { return shape_; }
  Scalar offset() const { return offset_; }
  Eigen::Index dim() const { return center_.size(); }

  /// Same set with the shape divided by s (s > 1 enlarges the set).
  Normotope scaled(Scalar s) const { return Normotope(center_, shape_ / s, offset_); }

 private:
  Vector center_;
  Matrix shape_;
  Scalar offset_{1};
};

using NormotopeD = Normotope<double>;

bool contains(const NormotopeD& n, const Eigen::VectorXd& x);
/// |shape (x - center)|_2 / offset.
double normalized_distance(const NormotopeD& n, const Eigen::VectorXd& x);

/// l2 logarithmic norm: largest eigenvalue of the symmetric part.
double lognorm2(const Eigen::MatrixXd& a);
/// Largest singular value.
double specnorm2(const Eigen::MatrixXd& a);

/// Exact range of a^T x + b over the ellipsoid, rounded outward.
IntervalD linear_range(const Eigen::VectorXd& a, double b, const NormotopeD& n);

/// Tight axis-aligned box around the ellipsoid.
IntervalVector bounding_box(const NormotopeD& n);
Eigen::VectorXd bounding_half_widths(const NormotopeD& n);

/// Largest logarithmic-norm rate over the inclusion's corners, measured in
/// the shape's coordinates and relative to the center Jacobian.
double offset_rate(const Eigen::MatrixXd& shape, const Eigen::MatrixXd& jac_center, const LinearInclusion& inclusion);

/// One explicit Euler step of the parametric embedding system.
NormotopeD embed_step(const NormotopeD& n, const Eigen::VectorXd& f_center, const Eigen::MatrixXd& jac_center,
                      const LinearInclusion& inclusion, double h);

struct EmbeddingTrajectory {
  std::vector<double> times;
  std::vector<NormotopeD> states;

  std::size_t size() const { return states.size(); }
};

/// Euler advances (center, shape) exactly as embed_step; Rk4 integrates them
/// with the classical fourth-order scheme along the center. The offset always
/// takes the Euler update.
enum class EmbedScheme { Euler, Rk4 };

struct EmbedOptions {
  double step = 1e-4;
  double start_time = 0.0;
  EmbedScheme scheme = EmbedScheme::Rk4;
  std::size_t max_steps = 20000;
  double inflation = 1.1;
  int max_inflation_doublings = 3;
  int max_step_halvings = 3;
  std::size_t corner_cap = kDefaultCornerCap;
};

using StopPredicate = std::function<bool(const EmbeddingTrajectory&)>;

/// Integrates the embedding system from n0 at start_time until `stop` fires.
/// Each step builds its linear inclusion over an inflated box around the
/// current set and checks that the next set stays inside that box.
EmbeddingTrajectory embed_flow(const NormotopeD& n0, const ContinuousField& system, const StopPredicate& stop,
                               const EmbedOptions& opts = {});

}  // namespace hytube
