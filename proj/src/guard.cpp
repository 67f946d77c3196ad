#include "hytube/guard.hpp"

#include <Eigen/QR>

#include "hytube/errors.hpp"

namespace hytube {

AffineGuard::AffineGuard(Eigen::VectorXd a, double b) : normal(std::move(a)), offset(b) {
  const Eigen::Index n = normal.size();
  const double na = normal.norm();
  if (n < 2 || !(na > 0.0)) throw Error(ErrorKind::InvalidState, "guard normal must be nonzero with dimension >= 2");

  // The trailing columns of Q from a Householder QR of a span a's complement.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(normal);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  basis = q.rightCols(n - 1);
  anchor = -offset / normal.squaredNorm() * normal;
}

}  // namespace hytube
