#pragma once

#include <cmath>
#include <concepts>
#include <ostream>

#include <Eigen/Core>

#include "hytube/interval.hpp"

namespace hytube {

/// Forward-mode dual number carrying one directional derivative.
///
/// Templated on the value scalar: Dual<double> gives point derivatives,
/// Dual<Interval> gives derivative enclosures over a box.
template <typename T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(const T& value, const T& deriv) : v(value), d(deriv) {}
  template <typename U>
    requires std::convertible_to<U, T>
  Dual(const U& value) : v(T(value)), d(T(0.0)) {}  // NOLINT: constants promote implicitly

  static Dual variable(const T& value) { return Dual(value, T(1.0)); }

  Dual operator-() const { return {-v, -d}; }
  Dual operator+() const { return *this; }

  friend Dual operator+(const Dual& a, const Dual& b) { return {a.v + b.v, a.d + b.d}; }
  friend Dual operator-(const Dual& a, const Dual& b) { return {a.v - b.v, a.d - b.d}; }
  friend Dual operator*(const Dual& a, const Dual& b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }

  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend std::ostream& operator<<(std::ostream& os, const Dual& x) { return os << x.v << "+" << x.d << "e"; }
};

template <typename T>
Dual<T> sin(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {sin(x.v), cos(x.v) * x.d};
}

template <typename T>
Dual<T> cos(const Dual<T>& x) {
  using std::cos;
  using std::sin;
  return {cos(x.v), -(sin(x.v) * x.d)};
}

template <typename T>
Dual<T> tan(const Dual<T>& x) {
  using std::tan;
  const T t = tan(x.v);
  return {t, (T(1.0) + t * t) * x.d};
}

template <typename T>
Dual<T> atan(const Dual<T>& x) {
  using std::atan;
  return {atan(x.v), x.d / (T(1.0) + x.v * x.v)};
}

template <typename T>
Dual<T> sqrt(const Dual<T>& x) {
  using std::sqrt;
  const T s = sqrt(x.v);
  return {s, x.d / (T(2.0) * s)};
}

template <typename T>
Dual<T> sqr(const Dual<T>& x) {
  return {x.v * x.v, T(2.0) * x.v * x.d};
}

inline double sqr(double x) { return x * x; }

template <typename T>
T value_of(const Dual<T>& x) { return x.v; }
template <typename T>
T deriv_of(const Dual<T>& x) { return x.d; }

using DualD = Dual<double>;
using DualI = Dual<IntervalD>;

template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

}  // namespace hytube

namespace Eigen {

template <typename T>
struct NumTraits<hytube::Dual<T>> : GenericNumTraits<double> {
  using Real = hytube::Dual<T>;
  using NonInteger = hytube::Dual<T>;
  using Literal = hytube::Dual<T>;
  using Nested = hytube::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 16,
    MulCost = 32
  };
};

}  // namespace Eigen
