#include <doctest.h>

#include <cmath>
#include <numbers>

#include "loopspec/bracketing.hpp"

using namespace loopspec;

namespace {

double dirichlet_kappa(double a, double beta) {
  double lo = 1e-9, hi = 2 / beta;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (2 / beta * std::tanh(mid * a) > mid ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Config;
}

}  // namespace

TEST_SUITE("bracketing") {
  TEST_CASE("halfwidth schedule") {
    const HalfwidthChoice h = halfwidth_schedule(0.1);
    CHECK(h.a == doctest::Approx(0.075 * std::log(10.0)).epsilon(1e-15));
    CHECK_FALSE(h.clamped);
    const HalfwidthChoice c = halfwidth_schedule(0.2, 0.1);
    CHECK(c.clamped);
    CHECK(c.a == 0.1);
    CHECK(c.unclamped == doctest::Approx(-0.15 * std::log(0.2)));
    for (double b : {0.0, 1.0, -0.5, 1.5}) CHECK(kind_of([&] { halfwidth_schedule(b); }) == ErrorKind::InvalidBeta);
  }

  TEST_CASE("circle: bracket eigenvalues from closed forms") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 512);
    const double beta = 0.1;
    const BracketingReport r = assemble_bracket(p, beta, 9);
    const double a = r.halfwidth.a;
    const double kp = dirichlet_kappa(a, beta);
    CHECK(r.root_plus.kappa == doctest::Approx(kp).epsilon(1e-12));
    for (int j = 0; j < 9; ++j) {
      const double n2 = std::pow((j + 1) / 2, 2);
      const double up = n2 / std::pow(1 - a, 2) - 0.25 / std::pow(1 + a, 2);
      CHECK(r.omega_plus[j] == doctest::Approx(-kp * kp + up).epsilon(1e-11));
      CHECK(r.omega_minus[j] <= r.omega_plus[j]);
    }
    CHECK(r.ordering_violations.empty());
    CHECK(r.weyl == doctest::Approx(40.0).epsilon(1e-14));
    CHECK(r.second_plus >= 0.0);
    CHECK(r.second_minus >= r.gap_bound);
    CHECK(r.renormalized_plus()[0] == doctest::Approx(r.omega_plus[0] + 400.0));
  }

  TEST_CASE("hypotheses are enforced") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 256);
    CHECK(kind_of([&] { assemble_bracket(p, 0.9, 4); }) == ErrorKind::HypothesisViolated);
    CHECK(kind_of([&] { assemble_bracket(p, 1.2, 4); }) == ErrorKind::InvalidBeta);
  }

  TEST_CASE("counting window and counts") {
    CHECK(counting_window(9.0, 0.5) == 18);
    CHECK(counting_window(1.0, 3 / std::numbers::pi / 10.5) == 11);

    const GeometryProfile p = build_profile(Curve::circle(1.0), 512);
    const double beta = 0.2;
    const BracketingReport r = assemble_bracket(p, beta, counting_window(p.length, beta));
    const Counts c = count_negative(r);
    int plus = 0, minus = 0;
    for (int j = 0; j < r.omega_plus.size(); ++j) {
      plus += r.omega_plus[j] < 0;
      minus += r.omega_minus[j] < 0;
    }
    CHECK(c.plus == plus);
    CHECK(c.minus == minus);
    CHECK(c.plus <= c.minus);

    BracketingReport tiny = r;
    tiny.omega_minus = Eigen::VectorXd::Constant(3, -1.0);
    CHECK(kind_of([&] { count_negative(tiny); }) == ErrorKind::WindowTooSmall);
  }

  TEST_CASE("fit_ratios on synthetic data") {
    const FitSummary exact = fit_ratios({2.0, 1.0, 0.5}, {1.0, 0.5, 0.25});
    CHECK(exact.least_squares_constant == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(exact.max_ratio == doctest::Approx(2.0));
    CHECK(exact.min_ratio == doctest::Approx(2.0));
    CHECK(exact.non_growing);
    const FitSummary growing = fit_ratios({1.0, 2.0, 5.0}, {1.0, 1.0, 1.0});
    CHECK_FALSE(growing.non_growing);
    CHECK(growing.max_ratio == doctest::Approx(5.0));
    CHECK(growing.least_squares_constant == doctest::Approx(8.0 / 3.0));
  }

  TEST_CASE("eigenvalue law on the circle") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 512);
    const Theorem1Report rep = theorem1_verdict(p, {0.2, 0.1, 0.05}, 3);
    CHECK(rep.rows.size() == 9);
    CHECK(rep.containment);
    CHECK(rep.rates_bounded);
    CHECK(rep.pass);
    for (const Theorem1Row& row : rep.rows) {
      CHECK(row.renorm_minus <= row.mu);
      CHECK(row.mu <= row.renorm_plus);
    }
  }

  TEST_CASE("counting law row") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 512);
    const Theorem2Row row = theorem2_row(p, 0.05);
    CHECK(row.weyl == doctest::Approx(80.0).epsilon(1e-14));
    CHECK(row.nested);
    CHECK(row.deviation_plus == doctest::Approx(row.count_plus - 80.0));
    CHECK(std::abs(row.deviation_minus) < 4 * std::abs(std::log(0.05)));
    CHECK(row.weyl_ratio_minus == doctest::Approx(row.count_minus / 80.0));
  }
}
