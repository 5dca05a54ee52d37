#pragma once

// Periodic longitudinal operators  -c d^2/ds^2 + V(s)  on [0, L):
// the comparison operator S (V = -gamma^2/4), the free operator S0 and the
// bracketing operators U+-(a) with constant kinetic prefactors (1 -+ a gamma+)^-2.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loopspec/curve.hpp"

namespace loopspec {

enum class LongitudinalKind { S, S0, UPlus, UMinus };

const char* to_string(LongitudinalKind kind);

struct Operator1DSpec {
  LongitudinalKind kind = LongitudinalKind::S;
  double length = 0.0;
  double gamma_plus = 0.0;
  double halfwidth = 0.0;
  double kinetic_prefactor = 1.0;
  Eigen::VectorXd potential;  // samples on s_n = n L / N
};

struct Spectrum1D {
  Eigen::VectorXd eigenvalues;  // ascending, with multiplicity
  int n_modes = 0;
  int discretization_size = 0;  // Galerkin basis size (0 for the analytic S0 path)
  double max_residual = 0.0;
};

Operator1DSpec make_comparison_operator(const GeometryProfile& profile);
Operator1DSpec make_free_operator(const GeometryProfile& profile);

/// U+(a):  (1 - a gamma+)^-2 (-d^2/ds^2) + a (gamma'')_+ / (2 (1 - a gamma+)^3)
///                                       - gamma^2 / (4 (1 + a gamma+)^2)
Operator1DSpec build_u_plus(const GeometryProfile& profile, double a);

/// U-(a):  (1 + a gamma+)^-2 (-d^2/ds^2) - a (gamma'')_+ / (2 (1 - a gamma+)^3)
///         - 5 (a (gamma')_+)^2 / (4 (1 - a gamma+)^4) - gamma^2 / (4 (1 - a gamma+)^2)
Operator1DSpec build_u_minus(const GeometryProfile& profile, double a);

/// Eigenvalues 4 [j/2]^2 pi^2 / L^2, j = 1..n_modes.
Eigen::VectorXd free_periodic_eigenvalues(double length, int n_modes);

/// Lowest n_modes eigenvalues by Fourier-Galerkin discretization with
/// n_grid/4 harmonics; S0 is answered analytically. Throws GridTooCoarse when
/// n_grid < 4 n_modes and ConvergenceFailure when an eigenpair residual
/// exceeds 1e-9 (relative to the operator scale).
Spectrum1D solve_periodic(const Operator1DSpec& spec, int n_modes, int n_grid);

/// Galerkin matrix in the real basis {1, cos(k w s), sin(k w s)}, w = 2 pi / L,
/// ordered [c0, c1..cK, s1..sK]. Exposed for tests.
Eigen::MatrixXd periodic_galerkin_matrix(const Operator1DSpec& spec, int harmonics);

/// Groups of indices whose eigenvalues agree within tol * max(1, |lambda|).
std::vector<std::vector<int>> multiplets(const Eigen::VectorXd& eigenvalues, double tol = 1e-8);

}  // namespace loopspec
