#pragma once

// Transverse problems on (-a, a) \ {0}: the unique negative eigenvalue of
// T+ (Dirichlet outer edges) and T- (Robin edges f'(+-a) = -+ gamma+ f(+-a))
// from their spectral conditions, the T- gap bound, and a direct
// discretization of the transverse quadratic form with a doubled node at u = 0.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "loopspec/error.hpp"

namespace loopspec {

enum class OuterBoundary { Dirichlet, Robin };

template <typename Scalar>
struct TransverseRoot {
  Scalar kappa{};
  Scalar eigenvalue{};         // -kappa^2
  Scalar asymptotic_kappa{};   // two-term expansion as beta -> 0
  Scalar residual{};           // |spectral condition| / kappa
};

namespace detail {

template <typename Scalar, typename F, typename DF>
Scalar bisect_then_newton(F&& sign_fn, DF&& newton_fn, Scalar lo, Scalar hi, Scalar width) {
  // sign_fn(lo) > 0 >= sign_fn(hi)
  while (hi - lo > width) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    if (sign_fn(mid) > Scalar(0)) lo = mid;
    else hi = mid;
  }
  Scalar x = Scalar(0.5) * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const auto [f, df] = newton_fn(x);
    if (df != Scalar(0)) x -= f / df;
  }
  return x;
}

}  // namespace detail

/// Root of kappa = (2/beta) tanh(kappa a) in (0, 2/beta). Requires beta < 2a.
template <typename Scalar>
TransverseRoot<Scalar> solve_dirichlet_root(Scalar a, Scalar beta) {
  using std::abs;
  using std::cosh;
  using std::exp;
  using std::tanh;
  if (!(a > Scalar(0)) || !(beta > Scalar(0)))
    throw Error(ErrorKind::NoNegativeEigenvalue, "need a > 0 and beta > 0");
  if (!(beta < Scalar(2) * a))
    throw Error(ErrorKind::NoNegativeEigenvalue,
                "beta >= 2a: T+ has no negative eigenvalue");

  const Scalar top = Scalar(2) / beta;
  // (2/k) tanh(k a) - beta is strictly decreasing from 2a - beta > 0
  const auto g = [&](Scalar k) {
    const Scalar ka = k * a;
    const Scalar ratio = ka < Scalar(1e-8) ? Scalar(2) * a : Scalar(2) * tanh(ka) / k;
    return ratio - beta;
  };
  const auto newton = [&](Scalar k) {
    const Scalar c = cosh(k * a);
    return std::pair<Scalar, Scalar>{k - top * tanh(k * a),
                                     Scalar(1) - top * a / (c * c)};
  };
  const Scalar kappa =
      detail::bisect_then_newton<Scalar>(g, newton, Scalar(0), top, Scalar(1e-13) * top);

  TransverseRoot<Scalar> r;
  r.kappa = kappa;
  r.eigenvalue = -kappa * kappa;
  r.asymptotic_kappa = top - Scalar(4) / beta * exp(Scalar(-4) * a / beta);
  r.residual = abs(kappa - top * tanh(kappa * a)) / kappa;
  if (!(r.residual < Scalar(1e-12)))
    throw Error(ErrorKind::ConvergenceFailure, "Dirichlet root residual too large");
  return r;
}

/// Root of kappa = (2/beta)(1 + Z e^{-2 kappa a}) / (1 - Z e^{-2 kappa a}),
/// Z = (kappa - gamma+)/(kappa + gamma+). Requires 2/beta > gamma+.
template <typename Scalar>
TransverseRoot<Scalar> solve_robin_root(Scalar a, Scalar beta, Scalar gamma_plus) {
  using std::abs;
  using std::exp;
  if (!(a > Scalar(0)) || !(beta > Scalar(0)) || gamma_plus < Scalar(0))
    throw Error(ErrorKind::CouplingTooWeak, "need a > 0, beta > 0, gamma+ >= 0");
  if (!(Scalar(2) / beta > gamma_plus))
    throw Error(ErrorKind::CouplingTooWeak, "2/beta <= gamma+: Z would not be positive");

  const Scalar top = Scalar(2) / beta;
  const auto xi = [&](Scalar k) {
    return (k - gamma_plus) / (k + gamma_plus) * exp(Scalar(-2) * k * a);
  };
  const auto rho = [&](Scalar k) {  // decreasing in k
    const Scalar x = xi(k);
    return Scalar(2) / k * (Scalar(1) + x) / (Scalar(1) - x);
  };
  const auto sign_fn = [&](Scalar k) { return rho(k) - beta; };
  const auto newton = [&](Scalar k) {
    const Scalar e = exp(Scalar(-2) * k * a);
    const Scalar z = (k - gamma_plus) / (k + gamma_plus);
    const Scalar dz = Scalar(2) * gamma_plus / ((k + gamma_plus) * (k + gamma_plus));
    const Scalar x = z * e;
    const Scalar dx = e * (dz - Scalar(2) * a * z);
    const Scalar f = k - top * (Scalar(1) + x) / (Scalar(1) - x);
    const Scalar df = Scalar(1) - top * Scalar(2) * dx / ((Scalar(1) - x) * (Scalar(1) - x));
    return std::pair<Scalar, Scalar>{f, df};
  };

  Scalar lo = top, hi = Scalar(2) * top;
  while (sign_fn(hi) > Scalar(0)) {
    lo = hi;
    hi *= Scalar(2);
  }
  const Scalar kappa = detail::bisect_then_newton<Scalar>(sign_fn, newton, lo, hi, Scalar(1e-13) * top);

  TransverseRoot<Scalar> r;
  r.kappa = kappa;
  r.eigenvalue = -kappa * kappa;
  const Scalar ratio = (Scalar(2) - beta * gamma_plus) / (Scalar(2) + beta * gamma_plus);
  r.asymptotic_kappa = top + Scalar(4) / beta * ratio * exp(Scalar(-4) * a / beta);
  r.residual = abs(newton(kappa).first) / kappa;
  if (!(r.residual < Scalar(1e-12)))
    throw Error(ErrorKind::ConvergenceFailure, "Robin root residual too large");
  return r;
}

/// min{ gamma+/(2a), (pi/(4a))^2 }: T- has no eigenvalue in [0, bound) for 0 < beta < 2a.
template <typename Scalar>
Scalar robin_gap_bound(Scalar a, Scalar beta, Scalar gamma_plus) {
  if (!(a > Scalar(0)) || !(beta > Scalar(0)) || !(beta < Scalar(2) * a))
    throw Error(ErrorKind::HypothesisViolated, "gap bound needs 0 < beta < 2a");
  const Scalar q = Scalar(std::numbers::pi) / (Scalar(4) * a);
  return std::min(gamma_plus / (Scalar(2) * a), q * q);
}

struct TransverseProblem {
  double halfwidth = 0.5;
  double beta = 0.2;
  OuterBoundary outer = OuterBoundary::Dirichlet;
  double gamma_plus = 0.0;  // Robin coefficient at u = +-a
  double gamma_s = 0.0;     // local curvature in the interface term
  double jump_sign = 1.0;   // +1 for t+, -1 for t- (the two forms differ in sign)
  double grading = 0.0;     // node clustering toward u = 0 (0 = uniform)
};

/// Nodes 0 = u_0 < ... < u_n = a; u_k = a (e^{c k/n} - 1)/(e^c - 1), uniform for c = 0.
Eigen::VectorXd halfstrip_nodes(double a, int n_cells, double grading);

struct TransverseSpectrum {
  Eigen::VectorXd eigenvalues;  // lowest n_eigen (or all), ascending
  Eigen::VectorXd nodes;        // u of each unknown (0- and 0+ both stored as 0)
  Eigen::VectorXd ground_state; // B-normalized lowest eigenvector
  int interface_minus = 0;      // index of the u = 0- unknown
  int interface_plus = 0;       // index of the u = 0+ unknown
};

/// Piecewise-linear discretization of
///   ||f'||^2 - beta^-1 |f(0+) - f(0-)|^2 + sign (gamma_s/2)(|f(0+)|^2 - |f(0-)|^2)
///   [+ gamma+ (|f(a)|^2 + |f(-a)|^2) for the Robin edge]
/// with n_grid cells in total (n_grid/2 per side) and a lumped mass matrix.
/// The lowest n_eigen eigenvalues come from Sturm bisection; n_eigen <= 0 returns all.
TransverseSpectrum discretize_transverse(const TransverseProblem& problem, int n_grid, int n_eigen = 4);

}  // namespace loopspec
