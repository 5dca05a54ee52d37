#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "loopspec/strip.hpp"

using namespace loopspec;

namespace {

// Unit circle (gamma = -1): the rotation-invariant mode reduces the strip to a
// radial problem on (-a, a). Assembled here from the form directly.
double radial_fd(double beta, double a, int n, bool neumann) {
  const double c = std::min(2 * a / beta, 8.0);
  Eigen::VectorXd half(n + 1);
  for (int k = 0; k <= n; ++k) half[k] = a * std::expm1(c * k / n) / std::expm1(c);
  half[n] = a;
  const int layers = 2 * (n + 1);
  Eigen::VectorXd u(layers), w = Eigen::VectorXd::Zero(layers);
  for (int k = 0; k <= n; ++k) {
    u[n - k] = -half[k];
    u[n + 1 + k] = half[k];
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(layers, layers);
  for (int l = 0; l + 1 < layers; ++l) {
    if (l == n) continue;
    const double h = u[l + 1] - u[l];
    w[l] += h / 2;
    w[l + 1] += h / 2;
    K(l, l) += 1 / h;
    K(l + 1, l + 1) += 1 / h;
    K(l, l + 1) -= 1 / h;
    K(l + 1, l) -= 1 / h;
  }
  const double g = -1.0;
  for (int l = 0; l < layers; ++l) K(l, l) += w[l] * (-g * g / (4 * std::pow(1 + u[l] * g, 2)));
  const int m = n, p = n + 1;
  K(m, m) -= 1 / beta;
  K(p, p) -= 1 / beta;
  K(m, p) += 1 / beta;
  K(p, m) += 1 / beta;
  K(p, p) += g / 2;
  K(m, m) -= g / 2;
  if (neumann) {
    K(layers - 1, layers - 1) -= g / (2 * (1 + a * g));
    K(0, 0) += g / (2 * (1 - a * g));
  }
  const int lo = neumann ? 0 : 1, size = neumann ? layers : layers - 2;
  const Eigen::VectorXd s = w.segment(lo, size).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd C = s.asDiagonal() * K.block(lo, lo, size, size) * s.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(C, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

// Exact radial eigenvalue on the annulus 1 - a < r < 1 + a with the jump
// f(1+) - f(1-) = -beta f'(1) and matching derivatives.
double annulus_exact(double beta, double a, bool neumann) {
  const auto I0 = [](double x) { return std::cyl_bessel_i(0.0, x); };
  const auto I1 = [](double x) { return std::cyl_bessel_i(1.0, x); };
  const auto K0 = [](double x) { return std::cyl_bessel_k(0.0, x); };
  const auto K1 = [](double x) { return std::cyl_bessel_k(1.0, x); };
  // f / f' at r = 1 for the radial solution obeying the edge condition at r0
  const auto ratio = [&](double k, double r0) {
    const double x0 = k * r0;
    const double ci = neumann ? K1(x0) : K0(x0);
    const double ck = neumann ? I1(x0) : -I0(x0);
    return (I0(k) * ci + K0(k) * ck) / (k * (I1(k) * ci - K1(k) * ck));
  };
  const auto F = [&](double k) { return ratio(k, 1 - a) - ratio(k, 1 + a) - beta; };
  double lo = 1.0 / beta, hi = 4.0 / beta;
  const double sign_lo = F(lo) > 0 ? 1.0 : -1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) * sign_lo > 0 ? lo : hi) = mid;
  }
  const double k = 0.5 * (lo + hi);
  return -k * k;
}

StripOptions mesh(int n_s, int n_u) {
  StripOptions o;
  o.n_s = n_s;
  o.n_u = n_u;
  return o;
}

const double kBeta = 0.1;
const double kA = -0.75 * kBeta * std::log(kBeta);

}  // namespace

TEST_SUITE("strip") {
  TEST_CASE("circle: lowest mode equals the radial discretization on the same mesh") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 256);
    for (StripBoundary kind : {StripBoundary::Dirichlet, StripBoundary::Neumann}) {
      const StripSpectrum sp = solve_strip(assemble_form(p, kBeta, kA, kind, mesh(32, 64)), 3, -4 / (kBeta * kBeta));
      const double ref = radial_fd(kBeta, kA, 64, kind == StripBoundary::Neumann);
      CHECK(sp.eigenvalues[0] == doctest::Approx(ref).epsilon(1e-10));
    }
  }

  TEST_CASE("circle: convergence to the exact annulus eigenvalue") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 256);
    for (StripBoundary kind : {StripBoundary::Dirichlet, StripBoundary::Neumann}) {
      const double exact = annulus_exact(kBeta, kA, kind == StripBoundary::Neumann);
      double prev = 1e300;
      for (int n_u : {32, 64, 128}) {
        const double lam = solve_strip(assemble_form(p, kBeta, kA, kind, mesh(32, n_u)), 1, -400.0).eigenvalues[0];
        const double err = std::abs(lam - exact);
        CHECK(err < prev);
        prev = err;
      }
      CHECK(prev / std::abs(exact) < 5e-4);
    }
    // Dirichlet edges sit above natural edges
    CHECK(annulus_exact(kBeta, kA, false) > annulus_exact(kBeta, kA, true));
  }

  TEST_CASE("pencil is symmetric with a positive lumped mass") {
    const GeometryProfile p = build_profile(Curve::ellipse(2.0, 1.0), 512);
    for (StripBoundary kind : {StripBoundary::Dirichlet, StripBoundary::Neumann}) {
      const StripPencil pc = assemble_form(p, 0.1, 0.15, kind, mesh(64, 32));
      const SparseMatrixd At = pc.A.transpose();
      CHECK((pc.A - At).norm() < 1e-12 * pc.A.norm());
      CHECK(pc.B.diagonal().minCoeff() > 0.0);
      CHECK(pc.B.nonZeros() == pc.mesh.dofs());
      const double area = pc.B.diagonal().sum();
      if (kind == StripBoundary::Neumann) CHECK(area == doctest::Approx(p.length * 2 * 0.15).epsilon(1e-12));
      else CHECK(area < p.length * 2 * 0.15);
    }
  }

  TEST_CASE("inertia counts agree with the computed eigenvalues") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 256);
    const StripPencil pc = assemble_form(p, kBeta, kA, StripBoundary::Dirichlet, mesh(64, 32));
    const StripSpectrum sp = solve_strip(pc, 5, -400.0);
    CHECK(sp.residuals.maxCoeff() < 1e-8);
    CHECK(count_below(pc, sp.eigenvalues[0] - 1.0) == 0);
    CHECK(count_below(pc, 0.5 * (sp.eigenvalues[0] + sp.eigenvalues[1])) == 1);
    CHECK(count_below(pc, 0.5 * (sp.eigenvalues[2] + sp.eigenvalues[3])) == 3);
    // rotation pairs e^{+-is}
    CHECK(sp.eigenvalues[1] == doctest::Approx(sp.eigenvalues[2]).epsilon(1e-9));
    CHECK(sp.eigenvalues[1] - sp.eigenvalues[0] == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("ground state changes sign across the interface") {
    const GeometryProfile p = build_profile(Curve::ellipse(2.0, 1.0), 512);
    const StripPencil pc = assemble_form(p, 0.05, 0.1, StripBoundary::Neumann, mesh(64, 32));
    const StripSpectrum sp = solve_strip(pc, 1, -1600.0);
    const InterfaceTraces t = interface_traces(pc, sp.vectors.col(0));
    CHECK((t.plus + t.minus).norm() < 0.1 * t.plus.norm());
    CHECK(t.plus.dot(t.minus) < 0.0);
  }

  TEST_CASE("triplet export lists every stored entry") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 128);
    const StripPencil pc = assemble_form(p, 0.2, 0.2, StripBoundary::Dirichlet, mesh(32, 16));
    std::ostringstream os;
    write_triplets(os, pc);
    std::istringstream is(os.str());
    std::string line;
    long entries = 0, headers = 0;
    while (std::getline(is, line)) (line[0] == '#' ? headers : entries)++;
    CHECK(headers == 3);
    CHECK(entries == pc.A.nonZeros() + pc.B.nonZeros());
    CHECK(os.str().rfind("# loopspec strip pencil kind=dirichlet", 0) == 0);
  }

  TEST_CASE("errors") {
    const GeometryProfile p = build_profile(Curve::circle(1.0), 128);
    const auto kind_of = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::Config;
    };
    CHECK(kind_of([&] { assemble_form(p, 0.1, 0.2, StripBoundary::Dirichlet, mesh(16, 32)); }) ==
          ErrorKind::MeshTooCoarse);
    CHECK(kind_of([&] { assemble_form(p, 0.1, 0.2, StripBoundary::Dirichlet, mesh(32, 8)); }) ==
          ErrorKind::MeshTooCoarse);
    CHECK(kind_of([&] { assemble_form(p, 0.1, 0.7, StripBoundary::Neumann, mesh(32, 16)); }) ==
          ErrorKind::HalfwidthTooLarge);
  }
}
