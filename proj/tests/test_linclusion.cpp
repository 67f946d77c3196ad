#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytube/linclusion.hpp"
#include "hytube/walker.hpp"
#include "support.hpp"

using namespace hytube;
using namespace hytube::testing;

namespace {

// g(x) - g(c) in [M](x - c), with a few ulps of slack for the point side.
bool inclusion_holds(const IntervalMatrix& m, const Eigen::VectorXd& dg, const Eigen::VectorXd& dx) {
  const IntervalVector enc = iv_matvec(m, to_interval(dx));
  for (Eigen::Index i = 0; i < dg.size(); ++i) {
    const double tol = 1e-12 * (1.0 + std::abs(dg(i)));
    if (dg(i) < enc(i).lo() - tol || dg(i) > enc(i).hi() + tol) return false;
  }
  return true;
}

Eigen::VectorXd sample_box(Rng& rng, const IntervalVector& box) {
  Eigen::VectorXd x(box.size());
  for (Eigen::Index i = 0; i < box.size(); ++i) x(i) = sample_in(rng, box(i));
  return x;
}

const walker::WalkerParams kParams{};

Vec<DualI> walker_field(const Vec<DualI>& x) {
  return walker::transformed_dynamics<DualI>(x, DualI(IntervalD(8.0)), kParams);
}

Eigen::VectorXd walker_field_point(const Eigen::VectorXd& x) {
  return walker::transformed_dynamics<double>(x, 8.0, kParams);
}

}  // namespace

TEST_CASE("linear map gives a singleton mixed Jacobian") {
  Eigen::MatrixXd A(2, 2);
  A << 1, -2, 0.5, 3;
  auto g = derivative_enclosure_from([&](const Vec<DualI>& x) {
    Vec<DualI> out(2);
    out(0) = DualI(IntervalD(A(0, 0))) * x(0) + DualI(IntervalD(A(0, 1))) * x(1);
    out(1) = DualI(IntervalD(A(1, 0))) * x(0) + DualI(IntervalD(A(1, 1))) * x(1);
    return out;
  });
  const LinearInclusion inc = build_inclusion(g, make_box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)),
                                              Eigen::Vector2d(0, 0));
  REQUIRE(inc.corners.size() == 1);
  CHECK(inc.corners[0].isApprox(A, 0.0));
  CHECK_FALSE(inc.fallback);
}

TEST_CASE("square on [0, 2] around 1") {
  auto g = derivative_enclosure_from([](const Vec<DualI>& x) {
    Vec<DualI> out(1);
    out(0) = x(0) * x(0);
    return out;
  });
  IntervalVector box(1);
  box(0) = IntervalD(0, 2);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(1, 1.0);
  const IntervalMatrix m = mixed_jacobian(g, box, c);
  CHECK(m(0, 0) == IntervalD(0, 4));
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const double x = uniform(rng, 0, 2);
    CHECK(inclusion_holds(m, Eigen::VectorXd::Constant(1, x * x - 1), Eigen::VectorXd::Constant(1, x - 1)));
  }
  const LinearInclusion inc = build_inclusion(g, box, c);
  CHECK(inc.corners.size() == 2);
}

TEST_CASE("center outside the box is rejected") {
  auto g = derivative_enclosure_from([](const Vec<DualI>& x) { return x; });
  IntervalVector box(1);
  box(0) = IntervalD(0, 1);
  CHECK_THROWS(mixed_jacobian(g, box, Eigen::VectorXd::Constant(1, 2.0)));
  CHECK_THROWS(mixed_jacobian(g, box, Eigen::VectorXd::Zero(2)));
}

TEST_CASE("two uncertain entries give four corners") {
  auto g = derivative_enclosure_from([](const Vec<DualI>& x) {
    Vec<DualI> out(2);
    out(0) = x(0) * x(0);
    out(1) = x(1) * x(1) + x(0);
    return out;
  });
  const LinearInclusion inc =
      build_inclusion(g, make_box(Eigen::Vector2d(1, 1), Eigen::Vector2d(0.5, 0.5)), Eigen::Vector2d(1, 1));
  CHECK(inc.corners.size() == 4);
}

TEST_CASE("corner cap switches to the center and radius form") {
  const Eigen::VectorXd c = Eigen::Vector4d(1.0, 0.2, -0.1, 0.3);
  const IntervalVector box = make_box(c, Eigen::Vector4d::Constant(1e-2));
  const LinearInclusion inc = build_inclusion(derivative_enclosure_from(walker_field), box, c, 4);
  CHECK(inc.fallback);
  CHECK(inc.corners.size() == 1);
  CHECK(matrix_contains(inc.jacobian, inc.mid));
}

TEST_CASE("walker field inclusion holds on sampled points") {
  const Eigen::VectorXd c = Eigen::Vector4d(1.02, 0.15, -0.2, 0.9);
  const IntervalVector box = make_box(c, Eigen::Vector4d(0.02, 0.03, 0.05, 0.05));
  const IntervalMatrix m = mixed_jacobian(derivative_enclosure_from(walker_field), box, c);
  const Eigen::VectorXd fc = walker_field_point(c);
  Rng rng(7);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const Eigen::VectorXd x = sample_box(rng, box);
    if (!inclusion_holds(m, walker_field_point(x) - fc, x - c)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("walker reset inclusion holds on sampled points") {
  const AffineGuard g = walker::transformed_guard(kParams);
  auto reset = [](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    return walker::transformed_reset<S>(x, S(0.3), kParams);
  };
  // near-guard pre-impact state
  Eigen::VectorXd c(4);
  c << 1.0, std::tan(0.25), -0.1, 1.2;
  c(1) -= g.value(c) / g.normal(1);
  const IntervalVector box = make_box(c, Eigen::Vector4d(0.01, 0.01, 0.05, 0.05));
  const IntervalMatrix m =
      mixed_jacobian(derivative_enclosure_from([&](const Vec<DualI>& x) { return reset(x); }), box, c);
  const Eigen::VectorXd rc = reset(c);
  Rng rng(8);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const Eigen::VectorXd x = sample_box(rng, box);
    if (!inclusion_holds(m, reset(x) - rc, x - c)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("shrinking the box never widens an entry") {
  const Eigen::VectorXd c = Eigen::Vector4d(1.0, 0.1, 0.3, -0.5);
  const auto g = derivative_enclosure_from(walker_field);
  Rng rng(9);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd half = uniform_vector(rng, 4, 1e-3, 0.1);
    const IntervalMatrix outer = mixed_jacobian(g, make_box(c, half), c);
    const IntervalMatrix inner = mixed_jacobian(g, make_box(c, half * uniform(rng, 0.1, 0.9)), c);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(outer(i, j).contains(inner(i, j)));
  }
}

TEST_CASE("dual interval Jacobian contains central differences") {
  Rng rng(10);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    Eigen::VectorXd x(4);
    x << uniform(rng, 0.8, 1.2), uniform(rng, -0.5, 0.5), uniform(rng, -1, 1), uniform(rng, -2, 2);
    const IntervalMatrix m = mixed_jacobian(derivative_enclosure_from(walker_field), to_interval(x), x);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-6;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e(j) = h;
      const Eigen::VectorXd fd = (walker_field_point(x + e) - walker_field_point(x - e)) / (2 * h);
      for (int i = 0; i < 4; ++i)
        if (std::abs(fd(i) - m(i, j).mid()) > 1e-6 * (1.0 + std::abs(fd(i)))) ++violations;
    }
  }
  CHECK(violations == 0);
}
