#pragma once

// Direct discretization of the transformed strip forms q_D (Dirichlet edges)
// and q_N (natural edges with the curvature boundary integrals) on
// (0, L) x ((-a, 0) u (0, a)), periodic in s, with doubled interface nodes.

#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "loopspec/curve.hpp"

namespace loopspec {

enum class StripBoundary { Dirichlet, Neumann };

const char* to_string(StripBoundary kind);

using SparseMatrixd = Eigen::SparseMatrix<double>;

struct StripOptions {
  int n_s = 256;
  int n_u = 128;             // cells per half strip
  double grading = -1.0;     // < 0: automatic, min(2a/beta, 8)
  double neumann_sign = 1.0; // +1 implements the curvature edge integrals as printed
};

struct StripMesh {
  int n_s = 0, n_u = 0;
  double a = 0.0, beta = 0.0, length = 0.0, grading = 0.0;
  Eigen::VectorXd s;       // s_i = i L / n_s
  Eigen::VectorXd u_half;  // 0 = u_0 < ... < u_n = a
  Eigen::VectorXd u;       // layer offsets, -a .. 0- | 0+ .. a
  Eigen::VectorXd weight;  // lumped transverse weights per layer
  Eigen::MatrixXd metric;    // g(s_i, u_l), n_s x layers
  Eigen::MatrixXd potential; // V(s_i, u_l), n_s x layers
  int layers = 0;
  int first_layer = 0, last_layer = 0;  // active layers (Dirichlet drops the edges)

  int active_layers() const { return last_layer - first_layer + 1; }
  int dofs() const { return n_s * active_layers(); }
  int index(int i_s, int layer) const { return i_s * active_layers() + (layer - first_layer); }
  int layer_minus() const { return n_u; }      // u = 0-
  int layer_plus() const { return n_u + 1; }   // u = 0+
};

/// Separate pieces of the form matrix; A = sum of the five parts.
struct StripFormParts {
  SparseMatrixd stiffness_s, stiffness_u, potential, interface, boundary;
  Eigen::VectorXd mass;  // diagonal of B
};

struct StripPencil {
  StripBoundary kind = StripBoundary::Dirichlet;
  StripMesh mesh;
  SparseMatrixd A, B;
  double gamma_plus = 0.0;
};

StripMesh make_strip_mesh(const GeometryProfile& profile, double beta, double a,
                          StripBoundary kind, const StripOptions& opt);

StripFormParts assemble_parts(const GeometryProfile& profile, const StripMesh& mesh,
                              StripBoundary kind, double neumann_sign = 1.0);

/// Throws MeshTooCoarse (n_s < 32 or n_u < 16) and HalfwidthTooLarge.
StripPencil assemble_form(const GeometryProfile& profile, double beta, double a,
                          StripBoundary kind, const StripOptions& opt = {});

struct StripSpectrum {
  StripBoundary kind = StripBoundary::Dirichlet;
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::VectorXd residuals;    // ||(A - lambda B) v|| / (||B v|| max(1, |lambda|))
  Eigen::MatrixXd vectors;      // generalized eigenvectors, B-normalized
  int n_s = 0, n_u = 0;
  double a = 0.0, beta = 0.0, shift = 0.0;
  int krylov_dim = 0;
};

/// Lowest n_modes eigenpairs by shift-invert Lanczos. The shift starts at
/// target - gamma+^2 - 1 and is lowered until the LDL^T inertia shows no
/// eigenvalue below it. Throws ConvergenceFailure or FactorizationFailure.
StripSpectrum solve_strip(const StripPencil& pencil, int n_modes, double target);

/// Number of eigenvalues of the pencil below `shift`, from the inertia of A - shift B.
int count_below(const StripPencil& pencil, double shift = 0.0);

/// f(s_i, 0-) and f(s_i, 0+) of a DOF vector.
struct InterfaceTraces {
  Eigen::VectorXd minus, plus;
};
InterfaceTraces interface_traces(const StripPencil& pencil, const Eigen::VectorXd& v);

/// Dirichlet and Neumann eigenvalues on the requested mesh and on the mesh
/// halved in both directions; the difference is the measured refinement error.
struct StripBracket {
  double beta = 0.0, a = 0.0;
  Eigen::VectorXd xi_minus, xi_plus;          // Neumann (lower), Dirichlet (upper)
  Eigen::VectorXd tol_minus, tol_plus;        // |fine - coarse|
  double max_residual = 0.0;
};
StripBracket strip_bracket(const GeometryProfile& profile, double beta, double a, int n_modes,
                           const StripOptions& opt = {});

/// Coordinate-format export: header line, then "row col value" for A and B.
void write_triplets(std::ostream& os, const StripPencil& pencil);

}  // namespace loopspec
