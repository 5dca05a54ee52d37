#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "loopspec/curve.hpp"

using namespace loopspec;

namespace {

constexpr double kPi = std::numbers::pi;

// adaptive Simpson, used as the arc-length oracle
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  const double l = (c - a) / 6.0 * (fa + 4.0 * f(0.5 * (a + c)) + fc);
  const double r = (b - c) / 6.0 * (fc + 4.0 * f(0.5 * (c + b)) + fb);
  if (depth > 40 || std::abs(l + r - whole) < 15.0 * tol) return l + r + (l + r - whole) / 15.0;
  return simpson(f, a, c, tol / 2, depth + 1) + simpson(f, c, b, tol / 2, depth + 1);
}

double quad_length(const Curve& c, double t0, double t1) {
  return simpson([&](double t) { return c.jet(t)[1].norm(); }, t0, t1, 1e-14);
}

FourierParams wobbly(std::mt19937& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  FourierParams p;
  p.x_cos = {0.0, 1.0, u(rng), u(rng), u(rng)};
  p.x_sin = {0.0, 0.0, u(rng), u(rng), u(rng)};
  p.y_cos = {0.0, 0.0, u(rng), u(rng), u(rng)};
  p.y_sin = {0.0, 1.0, u(rng), u(rng), u(rng)};
  return p;
}

}  // namespace

TEST_SUITE("curve") {
  TEST_CASE("circle: length, curvature sign and halfwidth") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 128);
    CHECK(p.length == doctest::Approx(2 * kPi).epsilon(1e-14));
    CHECK(p.gamma_plus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.max_halfwidth == doctest::Approx(0.5).epsilon(1e-10));
    for (int i = 0; i < p.size(); ++i) CHECK(p.gamma[i] == doctest::Approx(-1.0).epsilon(1e-12));

    const GeometryProfile q = build_profile(Curve::circle(2.0, Orientation::Clockwise), 128);
    CHECK(q.length == doctest::Approx(4 * kPi).epsilon(1e-14));
    CHECK(q.gamma[7] == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("ellipse: length against quadrature, curvature against closed form") {
    const Curve c = Curve::ellipse(2.0, 1.0);
    const GeometryProfile p = build_profile(c, 512);
    const double oracle = quad_length(c, 0.0, 2 * kPi);
    CHECK(oracle == doctest::Approx(9.688448220547679).epsilon(1e-12));
    CHECK(p.length == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(p.gamma_plus == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(p.max_halfwidth == doctest::Approx(0.25).epsilon(1e-8));

    // s(t) at interior points, and gamma(t) = -ab / (a^2 sin^2 + b^2 cos^2)^{3/2}
    for (double s : {0.3, 1.7, 4.4, 8.1}) {
      const ArcPoint a = p.evaluate(s);
      CHECK(quad_length(c, 0.0, a.t) == doctest::Approx(s).epsilon(1e-12));
      const double d = 4.0 * std::pow(std::sin(a.t), 2) + std::pow(std::cos(a.t), 2);
      CHECK(a.gamma == doctest::Approx(-2.0 / std::pow(d, 1.5)).epsilon(1e-11));
    }
  }

  TEST_CASE("curvature derivatives match finite differences in s") {
    std::mt19937 rng(7);
    const GeometryProfile p = build_profile(Curve::fourier(wobbly(rng, 0.05)), 256);
    const double h = 1e-4;
    for (double s : {0.1, 2.0, 3.3, 5.9}) {
      const ArcPoint m = p.evaluate(s - h), c = p.evaluate(s), q = p.evaluate(s + h);
      CHECK(c.gamma_prime == doctest::Approx((q.gamma - m.gamma) / (2 * h)).epsilon(1e-6));
      CHECK(c.gamma_double_prime == doctest::Approx((q.gamma - 2 * c.gamma + m.gamma) / (h * h)).epsilon(1e-4));
      const Eigen::Vector2d fd = (q.position - m.position) / (2 * h);
      CHECK((fd - c.tangent).norm() < 1e-7);
    }
  }

  TEST_CASE("property: unit speed, curvature identity, turning number") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 8; ++trial) {
      const auto o = trial % 2 ? Orientation::Clockwise : Orientation::CounterClockwise;
      const GeometryProfile p = build_profile(Curve::fourier(wobbly(rng, 0.06), o), 256);
      const ProfileChecks ck = check_profile(p);
      CHECK(ck.unit_speed_error < 1e-10);
      CHECK(ck.curvature_identity_error < 1e-8);
      CHECK(ck.turning_number_error < 1e-9);
      CHECK(std::abs(ck.total_curvature) == doctest::Approx(2 * kPi).epsilon(1e-9));
    }
  }

  TEST_CASE("arc-length reparametrization is consistent with the profile") {
    const Curve c = Curve::ellipse(3.0, 1.5);
    const ArcLengthSamples a = arc_length_reparametrize(c, 64);
    const GeometryProfile p = build_profile(c, 64);
    CHECK(a.length == doctest::Approx(p.length).epsilon(1e-14));
    for (int i = 0; i < 64; ++i) CHECK(a.t[i] == doctest::Approx(p.t_grid[i]).epsilon(1e-12));
  }

  TEST_CASE("tube map Jacobian is |1 - u gamma|") {
    const GeometryProfile p = build_profile(Curve::ellipse(2.0, 1.0), 256);
    const double h = 1e-5;
    for (double s : {0.5, 2.5, 6.0})
      for (double u : {-0.2, 0.1, 0.2}) {
        const Eigen::Vector2d ds = (tube_map(p, s + h, u) - tube_map(p, s - h, u)) / (2 * h);
        const Eigen::Vector2d du = (tube_map(p, s, u + h) - tube_map(p, s, u - h)) / (2 * h);
        const double jac = std::abs(ds.x() * du.y() - ds.y() * du.x());
        CHECK(jac == doctest::Approx(std::abs(1.0 - u * p.evaluate(s).gamma)).epsilon(1e-7));
      }
    CHECK_THROWS_AS(tube_map(p, 1.0, 0.3), Error);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(build_profile(Curve::circle(1.0), 8), Error);
    FourierParams eight;  // figure eight: x = cos t, y = sin 2t
    eight.x_cos = {0.0, 1.0};
    eight.y_sin = {0.0, 0.0, 1.0};
    try {
      build_profile(Curve::fourier(eight), 256);
      FAIL("figure eight accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SelfIntersecting);
    }
    CHECK_THROWS_AS(Curve::circle(-1.0), Error);
  }
}
