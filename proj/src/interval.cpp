#include "hytube/interval.hpp"

namespace hytube {

IntervalVector iv_matvec(const IntervalMatrix& m, const IntervalVector& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("iv_matvec: dimension mismatch");
  IntervalVector out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    IntervalD acc(0.0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc += m(i, j) * v(j);
    out(i) = acc;
  }
  return out;
}

IntervalMatrix iv_matmul(const IntervalMatrix& a, const IntervalMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("iv_matmul: dimension mismatch");
  IntervalMatrix out(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      IntervalD acc(0.0);
      for (Eigen::Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

Eigen::MatrixXd iv_mid(const IntervalMatrix& m) {
  return m.unaryExpr([](const IntervalD& x) { return x.mid(); });
}

Eigen::MatrixXd iv_rad(const IntervalMatrix& m) {
  // Upward so that mid +/- rad still covers the entry.
  return m.unaryExpr([](const IntervalD& x) {
    return std::max(x.hi() - x.mid(), x.mid() - x.lo());
  });
}

Eigen::VectorXd iv_mid(const IntervalVector& v) {
  return v.unaryExpr([](const IntervalD& x) { return x.mid(); });
}

Eigen::VectorXd iv_rad(const IntervalVector& v) {
  return v.unaryExpr([](const IntervalD& x) {
    return std::max(x.hi() - x.mid(), x.mid() - x.lo());
  });
}

IntervalVector to_interval(const Eigen::VectorXd& v) { return v.cast<IntervalD>(); }

IntervalMatrix to_interval(const Eigen::MatrixXd& m) { return m.cast<IntervalD>(); }

IntervalVector make_box(const Eigen::VectorXd& center, const Eigen::VectorXd& half_width) {
  if (center.size() != half_width.size()) throw std::invalid_argument("make_box: dimension mismatch");
  IntervalVector box(center.size());
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    if (!(half_width(i) >= 0.0)) throw std::invalid_argument("make_box: negative half-width");
    box(i) = IntervalD::centered(center(i), half_width(i));
  }
  return box;
}

bool box_contains(const IntervalVector& box, const Eigen::VectorXd& x) {
  if (box.size() != x.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!box(i).contains(x(i))) return false;
  return true;
}

bool box_contains(const IntervalVector& outer, const IntervalVector& inner) {
  if (outer.size() != inner.size()) return false;
  for (Eigen::Index i = 0; i < outer.size(); ++i)
    if (!outer(i).contains(inner(i))) return false;
  return true;
}

bool matrix_contains(const IntervalMatrix& m, const Eigen::MatrixXd& a, double tol) {
  if (m.rows() != a.rows() || m.cols() != a.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (a(i, j) < m(i, j).lo() - tol || a(i, j) > m(i, j).hi() + tol) return false;
  return true;
}

int count_non_singleton(const IntervalMatrix& m) {
  int k = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!m.data()[i].is_singleton()) ++k;
  return k;
}

std::vector<Eigen::MatrixXd> corners(const IntervalMatrix& m, std::size_t cap) {
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!m.data()[i].is_singleton()) free.push_back(i);
  const int k = static_cast<int>(free.size());
  if (k >= 63 || (std::size_t{1} << k) > cap) throw CornerExplosion(k);

  const Eigen::MatrixXd lo = m.unaryExpr([](const IntervalD& x) { return x.lo(); });
  const std::size_t count = std::size_t{1} << k;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Eigen::MatrixXd c = lo;
    for (int b = 0; b < k; ++b)
      if (mask & (std::size_t{1} << b)) c.data()[free[b]] = m.data()[free[b]].hi();
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace hytube
