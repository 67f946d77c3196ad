#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace hytube {

namespace detail {

// Number of ulps a bound is pushed outward when a primitive is not exact.
inline constexpr int kOutwardUlps = 4;

template <typename T>
T step_down(T x, int ulps = kOutwardUlps) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, -std::numeric_limits<T>::infinity());
  return x;
}

template <typename T>
T step_up(T x, int ulps = kOutwardUlps) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, std::numeric_limits<T>::infinity());
  return x;
}

// Error-free transformations decide whether a rounded result is exact.
template <typename T>
bool sum_is_exact(T a, T b, T s) {
  const T bb = s - a;
  const T err = (a - (s - bb)) + (b - bb);
  return err == T(0);
}

template <typename T>
bool product_is_exact(T a, T b, T p) {
  return std::isfinite(p) && std::fma(a, b, -p) == T(0);
}

}  // namespace detail

/// Closed real interval [lo, hi].
///
/// Every arithmetic operation returns an enclosure of the pointwise results.
/// Bounds of inexact primitives are widened outward by a few ulps, so the
/// enclosure survives round-to-nearest arithmetic.
template <typename T>
class Interval {
 public:
  using value_type = T;

  Interval() = default;
  Interval(T v) : lo_(v), hi_(v) {}  // NOLINT: implicit, lets constants mix with intervals
  Interval(T lo, T hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi or NaN bound");
  }

  static Interval hull(T a, T b) { return a <= b ? Interval(a, b) : Interval(b, a); }
  static Interval centered(T mid, T rad) { return Interval(detail::step_down(mid - rad), detail::step_up(mid + rad)); }

  T lo() const { return lo_; }
  T hi() const { return hi_; }
  T mid() const { return lo_ + (hi_ - lo_) / T(2); }
  T rad() const { return (hi_ - lo_) / T(2); }
  T width() const { return hi_ - lo_; }
  T mag() const { return std::max(std::abs(lo_), std::abs(hi_)); }

  bool is_singleton() const { return lo_ == hi_; }
  bool contains(T v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool contains_zero() const { return lo_ <= T(0) && T(0) <= hi_; }
  bool strictly_positive() const { return lo_ > T(0); }
  bool strictly_negative() const { return hi_ < T(0); }

  Interval operator-() const { return {-hi_, -lo_}; }
  Interval operator+() const { return *this; }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return {add_down(a.lo_, b.lo_), add_up(a.hi_, b.hi_)};
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    return {add_down(a.lo_, -b.hi_), add_up(a.hi_, -b.lo_)};
  }
  friend Interval operator*(const Interval& a, const Interval& b) {
    if (a.is_zero() || b.is_zero()) return Interval(T(0));
    const T c[4] = {a.lo_ * b.lo_, a.lo_ * b.hi_, a.hi_ * b.lo_, a.hi_ * b.hi_};
    const T f[4][2] = {{a.lo_, b.lo_}, {a.lo_, b.hi_}, {a.hi_, b.lo_}, {a.hi_, b.hi_}};
    int imin = 0, imax = 0;
    for (int i = 1; i < 4; ++i) {
      if (c[i] < c[imin]) imin = i;
      if (c[i] > c[imax]) imax = i;
    }
    T lo = c[imin], hi = c[imax];
    if (!detail::product_is_exact(f[imin][0], f[imin][1], lo)) lo = detail::step_down(lo);
    if (!detail::product_is_exact(f[imax][0], f[imax][1], hi)) hi = detail::step_up(hi);
    return {lo, hi};
  }
  friend Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains_zero()) throw std::domain_error("Interval division by an interval containing zero");
    const T f[4][2] = {{a.lo_, b.lo_}, {a.lo_, b.hi_}, {a.hi_, b.lo_}, {a.hi_, b.hi_}};
    T q[4];
    for (int i = 0; i < 4; ++i) q[i] = f[i][0] / f[i][1];
    int imin = 0, imax = 0;
    for (int i = 1; i < 4; ++i) {
      if (q[i] < q[imin]) imin = i;
      if (q[i] > q[imax]) imax = i;
    }
    T lo = q[imin], hi = q[imax];
    if (std::fma(lo, f[imin][1], -f[imin][0]) != T(0)) lo = detail::step_down(lo);
    if (std::fma(hi, f[imax][1], -f[imax][0]) != T(0)) hi = detail::step_up(hi);
    return {lo, hi};
  }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator-=(const Interval& o) { return *this = *this - o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }
  Interval& operator/=(const Interval& o) { return *this = *this / o; }

  friend bool operator==(const Interval& a, const Interval& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }
  friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }

  friend std::ostream& operator<<(std::ostream& os, const Interval& x) {
    return os << '[' << x.lo_ << ", " << x.hi_ << ']';
  }

 private:
  bool is_zero() const { return lo_ == T(0) && hi_ == T(0); }

  static T add_down(T a, T b) {
    const T s = a + b;
    return detail::sum_is_exact(a, b, s) ? s : detail::step_down(s);
  }
  static T add_up(T a, T b) {
    const T s = a + b;
    return detail::sum_is_exact(a, b, s) ? s : detail::step_up(s);
  }

  T lo_{0};
  T hi_{0};
};

using IntervalD = Interval<double>;

template <typename T>
Interval<T> hull(const Interval<T>& a, const Interval<T>& b) {
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

template <typename T>
Interval<T> sqr(const Interval<T>& x) {
  const T a = std::abs(x.lo()), b = std::abs(x.hi());
  const T big = std::max(a, b);
  const T small = x.contains_zero() ? T(0) : std::min(a, b);
  T lo = small * small, hi = big * big;
  if (!detail::product_is_exact(small, small, lo)) lo = std::max(T(0), detail::step_down(lo));
  if (!detail::product_is_exact(big, big, hi)) hi = detail::step_up(hi);
  return {lo, hi};
}

template <typename T>
Interval<T> sqrt(const Interval<T>& x) {
  if (x.lo() < T(0)) throw std::domain_error("Interval sqrt of an interval with negative part");
  T lo = std::sqrt(x.lo()), hi = std::sqrt(x.hi());
  if (!detail::product_is_exact(lo, lo, x.lo())) lo = std::max(T(0), detail::step_down(lo));
  if (!detail::product_is_exact(hi, hi, x.hi())) hi = detail::step_up(hi);
  return {lo, hi};
}

template <typename T>
Interval<T> abs(const Interval<T>& x) {
  if (x.lo() >= T(0)) return x;
  if (x.hi() <= T(0)) return -x;
  return {T(0), x.mag()};
}

template <typename T>
Interval<T> atan(const Interval<T>& x) {
  const T lim = std::numbers::pi_v<T> / T(2);
  return {std::max(-lim, detail::step_down(std::atan(x.lo()))), std::min(lim, detail::step_up(std::atan(x.hi())))};
}

namespace detail {

// True if some point c0 + k*period (k integer) may lie in [lo, hi]. Errs on
// the side of reporting a hit.
template <typename T>
bool hits_lattice(T lo, T hi, T c0, T period) {
  const T k = std::ceil((lo - c0) / period - T(1e-9));
  return c0 + k * period <= hi + T(1e-9) * std::max(T(1), std::abs(hi));
}

}  // namespace detail

template <typename T>
Interval<T> sin(const Interval<T>& x) {
  constexpr T pi = std::numbers::pi_v<T>;
  if (x.width() >= T(2) * pi) return {T(-1), T(1)};
  const T a = std::sin(x.lo()), b = std::sin(x.hi());
  T lo = std::min(a, b), hi = std::max(a, b);
  lo = detail::hits_lattice(x.lo(), x.hi(), -pi / 2, T(2) * pi) ? T(-1) : std::max(T(-1), detail::step_down(lo));
  hi = detail::hits_lattice(x.lo(), x.hi(), pi / 2, T(2) * pi) ? T(1) : std::min(T(1), detail::step_up(hi));
  return {lo, hi};
}

template <typename T>
Interval<T> cos(const Interval<T>& x) {
  constexpr T pi = std::numbers::pi_v<T>;
  if (x.width() >= T(2) * pi) return {T(-1), T(1)};
  const T a = std::cos(x.lo()), b = std::cos(x.hi());
  T lo = std::min(a, b), hi = std::max(a, b);
  lo = detail::hits_lattice(x.lo(), x.hi(), pi, T(2) * pi) ? T(-1) : std::max(T(-1), detail::step_down(lo));
  hi = detail::hits_lattice(x.lo(), x.hi(), T(0), T(2) * pi) ? T(1) : std::min(T(1), detail::step_up(hi));
  return {lo, hi};
}

// Only defined on a single branch strictly inside (-pi/2, pi/2).
template <typename T>
Interval<T> tan(const Interval<T>& x) {
  const T lim = std::numbers::pi_v<T> / T(2);
  if (!(x.lo() > -lim && x.hi() < lim)) throw std::domain_error("Interval tan outside (-pi/2, pi/2)");
  return {detail::step_down(std::tan(x.lo())), detail::step_up(std::tan(x.hi()))};
}

template <typename T>
T lower(const Interval<T>& x) { return x.lo(); }
template <typename T>
T upper(const Interval<T>& x) { return x.hi(); }

using IntervalVector = Eigen::Matrix<IntervalD, Eigen::Dynamic, 1>;
using IntervalMatrix = Eigen::Matrix<IntervalD, Eigen::Dynamic, Eigen::Dynamic>;

/// Thrown by corners() when the number of corners would exceed the cap.
class CornerExplosion : public std::runtime_error {
 public:
  explicit CornerExplosion(int non_singleton)
      : std::runtime_error("interval matrix has " + std::to_string(non_singleton) + " non-singleton entries"),
        non_singleton_(non_singleton) {}
  int non_singleton() const { return non_singleton_; }

 private:
  int non_singleton_;
};

inline constexpr std::size_t kDefaultCornerCap = std::size_t{1} << 16;

IntervalVector iv_matvec(const IntervalMatrix& m, const IntervalVector& v);
IntervalMatrix iv_matmul(const IntervalMatrix& a, const IntervalMatrix& b);

Eigen::MatrixXd iv_mid(const IntervalMatrix& m);
Eigen::MatrixXd iv_rad(const IntervalMatrix& m);
Eigen::VectorXd iv_mid(const IntervalVector& v);
Eigen::VectorXd iv_rad(const IntervalVector& v);

IntervalVector to_interval(const Eigen::VectorXd& v);
IntervalMatrix to_interval(const Eigen::MatrixXd& m);

/// Box with the given center and per-axis half-widths, rounded outward.
IntervalVector make_box(const Eigen::VectorXd& center, const Eigen::VectorXd& half_width);

bool box_contains(const IntervalVector& box, const Eigen::VectorXd& x);
bool box_contains(const IntervalVector& outer, const IntervalVector& inner);
bool matrix_contains(const IntervalMatrix& m, const Eigen::MatrixXd& a, double tol = 0.0);

int count_non_singleton(const IntervalMatrix& m);

/// All 2^k vertex matrices of an interval matrix with k non-singleton
/// entries. Singleton entries are copied into every corner.
std::vector<Eigen::MatrixXd> corners(const IntervalMatrix& m, std::size_t cap = kDefaultCornerCap);

}  // namespace hytube

namespace Eigen {

template <typename T>
struct NumTraits<hytube::Interval<T>> : GenericNumTraits<T> {
  using Real = hytube::Interval<T>;
  using NonInteger = hytube::Interval<T>;
  using Literal = hytube::Interval<T>;
  using Nested = hytube::Interval<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 16
  };
};

}  // namespace Eigen
