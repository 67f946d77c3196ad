#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "hytube/dual.hpp"
#include "hytube/interval.hpp"
#include "support.hpp"

using namespace hytube;
using namespace hytube::testing;

TEST_CASE("interval products on the basic cases") {
  CHECK(IntervalD(1, 2) * IntervalD(3, 4) == IntervalD(3, 8));
  CHECK(IntervalD(-1, 1) * IntervalD(-1, 1) == IntervalD(-1, 1));
  CHECK(IntervalD(0, 0) * IntervalD(-5, 7) == IntervalD(0, 0));
  CHECK(IntervalD(1, 2) + IntervalD(3, 4) == IntervalD(4, 6));
  CHECK(-IntervalD(1, 2) == IntervalD(-2, -1));
  CHECK(IntervalD(1, 2) - IntervalD(3, 4) == IntervalD(-3, -1));
}

TEST_CASE("bad intervals are rejected") {
  CHECK_THROWS_AS(IntervalD(2, 1), std::invalid_argument);
  CHECK_THROWS_AS(IntervalD(1, 2) / IntervalD(-1, 1), std::domain_error);
  CHECK_THROWS_AS(sqrt(IntervalD(-1, 1)), std::domain_error);
}

TEST_CASE("inexact results are widened outward") {
  const IntervalD third = IntervalD(1.0) / IntervalD(3.0);
  CHECK(third.lo() < 1.0 / 3.0);
  CHECK(third.hi() > 1.0 / 3.0);
  const IntervalD s = IntervalD(0.1) + IntervalD(0.2);
  CHECK(s.contains(0.1 + 0.2));
  CHECK(s.lo() < s.hi());
}

TEST_CASE("inclusion isotonicity over random operands") {
  Rng rng(11);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const IntervalD a = random_interval(rng), b = random_interval(rng);
    const double x = sample_in(rng, a), y = sample_in(rng, b);
    if (!(a + b).contains(x + y)) ++violations;
    if (!(a - b).contains(x - y)) ++violations;
    if (!(a * b).contains(x * y)) ++violations;
    if (!(-a).contains(-x)) ++violations;
    if (!sqr(a).contains(x * x)) ++violations;
    if (!sin(a).contains(std::sin(x))) ++violations;
    if (!cos(a).contains(std::cos(x))) ++violations;
    if (!atan(a).contains(std::atan(x))) ++violations;
    if (!b.contains_zero() && !(a / b).contains(x / y)) ++violations;
    const IntervalD pos = abs(a);
    if (!sqrt(pos).contains(std::sqrt(std::abs(x)))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("tan stays inside its branch") {
  const IntervalD t = tan(IntervalD(-1.0, 1.2));
  CHECK(t.contains(std::tan(-1.0)));
  CHECK(t.contains(std::tan(1.2)));
  CHECK_THROWS_AS(tan(IntervalD(0.0, 2.0)), std::domain_error);
}

TEST_CASE("sin and cos reach their extremes inside the argument") {
  CHECK(sin(IntervalD(1.0, 2.0)).hi() == 1.0);
  CHECK(cos(IntervalD(3.0, 3.3)).lo() == -1.0);
  CHECK(sin(IntervalD(0.0, 7.0)) == IntervalD(-1, 1));
}

TEST_CASE("matvec examples") {
  IntervalMatrix id = to_interval(Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3)));
  IntervalVector box(3);
  box << IntervalD(-1, 2), IntervalD(0.5, 0.75), IntervalD(3, 3);
  const IntervalVector out = iv_matvec(id, box);
  for (int i = 0; i < 3; ++i) CHECK(out(i) == box(i));

  IntervalMatrix m(1, 1);
  m(0, 0) = IntervalD(0, 1);
  IntervalVector v(1);
  v(0) = IntervalD(2, 2);
  CHECK(iv_matvec(m, v)(0) == IntervalD(0, 2));

  IntervalVector wrong(2);
  CHECK_THROWS(iv_matvec(m, wrong));
}

TEST_CASE("matvec encloses sampled products") {
  Rng rng(5);
  const IntervalMatrix m = random_interval_matrix(rng, 3, 3);
  IntervalVector v(3);
  for (int i = 0; i < 3; ++i) v(i) = random_interval(rng, -2, 2);
  const IntervalVector out = iv_matvec(m, v);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    Eigen::MatrixXd a(3, 3);
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) {
      x(i) = sample_in(rng, v(i));
      for (int j = 0; j < 3; ++j) a(i, j) = sample_in(rng, m(i, j));
    }
    if (!box_contains(out, Eigen::VectorXd(a * x))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("center and radius are recovered exactly") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const IntervalMatrix m = random_interval_matrix(rng, 2, 3);
    const Eigen::MatrixXd c = iv_mid(m), r = iv_rad(m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(c(i, j) - r(i, j) == doctest::Approx(m(i, j).lo()).epsilon(1e-15));
        CHECK(c(i, j) + r(i, j) == doctest::Approx(m(i, j).hi()).epsilon(1e-15));
      }
  }
}

TEST_CASE("corner counts") {
  CHECK(corners(to_interval(Eigen::MatrixXd(Eigen::MatrixXd::Random(4, 4)))).size() == 1);

  IntervalMatrix two = to_interval(Eigen::MatrixXd(Eigen::MatrixXd::Zero(4, 4)));
  two(0, 1) = IntervalD(-1, 1);
  two(2, 3) = IntervalD(0, 2);
  CHECK(corners(two).size() == 4);

  IntervalMatrix four = two;
  four(1, 0) = IntervalD(1, 2);
  four(3, 3) = IntervalD(-2, -1);
  const auto c = corners(four);
  CHECK(c.size() == 16);
  std::set<std::vector<double>> distinct;
  for (const auto& m : c) distinct.insert(std::vector<double>(m.data(), m.data() + m.size()));
  CHECK(distinct.size() == 16);

  CHECK_THROWS_AS(corners(four, 8), CornerExplosion);
}

TEST_CASE("convex combinations of corners stay in the interval matrix") {
  Rng rng(17);
  IntervalMatrix m = random_interval_matrix(rng, 3, 3);
  for (int i = 0; i < 3; ++i) m(i, i) = IntervalD(m(i, i).mid());
  const auto c = corners(m);
  REQUIRE(c.size() == 64);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd w = uniform_vector(rng, static_cast<Eigen::Index>(c.size()), 0.0, 1.0);
    w /= w.sum();
    Eigen::MatrixXd combo = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t i = 0; i < c.size(); ++i) combo += w(static_cast<Eigen::Index>(i)) * c[i];
    if (!matrix_contains(m, combo, 1e-12)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("dual numbers carry exact first derivatives") {
  const DualD x = DualD::variable(0.7);
  const DualD y = sin(x) * x + atan(x) / (x + 1.0);
  const double h = 1e-6;
  auto f = [](double t) { return std::sin(t) * t + std::atan(t) / (t + 1.0); };
  CHECK(y.v == doctest::Approx(f(0.7)));
  CHECK(y.d == doctest::Approx((f(0.7 + h) - f(0.7 - h)) / (2 * h)).epsilon(1e-8));
}
