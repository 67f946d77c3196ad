#include "hytube/linclusion.hpp"

#include <stdexcept>
#include <string>

namespace hytube {

DerivativeEnclosure derivative_enclosure_from(DualIntervalMap g) {
  return [g = std::move(g)](const IntervalVector& box, const Eigen::VectorXd& center, int column) {
    const Eigen::Index n = box.size();
    Vec<DualI> arg(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const IntervalD value = k <= column ? box(k) : IntervalD(center(k));
      arg(k) = DualI(value, IntervalD(k == column ? 1.0 : 0.0));
    }
    const Vec<DualI> out = g(arg);
    IntervalVector col(out.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) col(i) = out(i).d;
    return col;
  };
}

IntervalMatrix mixed_jacobian(const DerivativeEnclosure& g, const IntervalVector& box, const Eigen::VectorXd& center) {
  if (box.size() != center.size()) throw std::invalid_argument("mixed_jacobian: box and center dimensions differ");
  if (!box_contains(box, center)) throw std::invalid_argument("mixed_jacobian: center outside box");
  IntervalMatrix m;
  for (int j = 0; j < static_cast<int>(box.size()); ++j) {
    const IntervalVector col = g(box, center, j);
    if (j == 0) m.resize(col.size(), box.size());
    if (col.size() != m.rows()) throw std::invalid_argument("mixed_jacobian: inconsistent column length");
    m.col(j) = col;
  }
  return m;
}

LinearInclusion build_inclusion(const DerivativeEnclosure& g, const IntervalVector& box, const Eigen::VectorXd& center,
                                std::size_t cap) {
  LinearInclusion inc;
  inc.center = center;
  inc.domain = box;
  inc.jacobian = mixed_jacobian(g, box, center);
  inc.mid = iv_mid(inc.jacobian);
  inc.rad = iv_rad(inc.jacobian);
  try {
    inc.corners = corners(inc.jacobian, cap);
  } catch (const CornerExplosion&) {
    inc.fallback = true;
    inc.corners = {inc.mid};
  }
  return inc;
}

}  // namespace hytube
