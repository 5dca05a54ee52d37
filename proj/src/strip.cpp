#include "loopspec/strip.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

#include <Eigen/SparseCholesky>

#include "loopspec/lanczos.hpp"
#include "loopspec/transverse.hpp"

namespace loopspec {

const char* to_string(StripBoundary kind) {
  return kind == StripBoundary::Dirichlet ? "dirichlet" : "neumann";
}

StripMesh make_strip_mesh(const GeometryProfile& profile, double beta, double a,
                          StripBoundary kind, const StripOptions& opt) {
  if (opt.n_s < 32 || opt.n_u < 16)
    throw Error(ErrorKind::MeshTooCoarse, "strip mesh needs n_s >= 32 and n_u >= 16");
  if (!(a > 0.0) || a > profile.max_halfwidth * (1.0 + 1e-12))
    throw Error(ErrorKind::HalfwidthTooLarge,
                "a = " + std::to_string(a) + " exceeds max halfwidth " +
                    std::to_string(profile.max_halfwidth));
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidBeta, "beta must be positive");

  StripMesh m;
  m.n_s = opt.n_s;
  m.n_u = opt.n_u;
  m.a = a;
  m.beta = beta;
  m.length = profile.length;
  m.grading = opt.grading < 0.0 ? std::min(2.0 * a / beta, 8.0) : opt.grading;
  m.s = Eigen::VectorXd::LinSpaced(m.n_s, 0.0, m.length * (m.n_s - 1) / m.n_s);
  m.u_half = halfstrip_nodes(a, m.n_u, m.grading);

  const int n = m.n_u;
  m.layers = 2 * (n + 1);
  m.u.resize(m.layers);
  m.weight = Eigen::VectorXd::Zero(m.layers);
  for (int k = 0; k <= n; ++k) {
    m.u[n - k] = -m.u_half[k];
    m.u[n + 1 + k] = m.u_half[k];
  }
  for (int k = 0; k < n; ++k) {
    const double h = m.u_half[k + 1] - m.u_half[k];
    m.weight[n - k] += 0.5 * h;
    m.weight[n - k - 1] += 0.5 * h;
    m.weight[n + 1 + k] += 0.5 * h;
    m.weight[n + 2 + k] += 0.5 * h;
  }
  m.first_layer = kind == StripBoundary::Dirichlet ? 1 : 0;
  m.last_layer = kind == StripBoundary::Dirichlet ? m.layers - 2 : m.layers - 1;

  m.metric.resize(m.n_s, m.layers);
  m.potential.resize(m.n_s, m.layers);
  for (int i = 0; i < m.n_s; ++i) {
    const ArcPoint p = profile.evaluate(m.s[i]);
    for (int l = 0; l < m.layers; ++l) {
      const double u = m.u[l];
      const double g = 1.0 + u * p.gamma;
      m.metric(i, l) = g;
      m.potential(i, l) = u * p.gamma_double_prime / (2.0 * g * g * g) -
                          5.0 * std::pow(u * p.gamma_prime, 2) / (4.0 * std::pow(g, 4)) -
                          p.gamma * p.gamma / (4.0 * g * g);
    }
  }
  if (m.metric.minCoeff() < 0.5)
    throw Error(ErrorKind::HalfwidthTooLarge, "metric factor 1 + u gamma drops below 1/2");
  return m;
}

StripFormParts assemble_parts(const GeometryProfile& profile, const StripMesh& m,
                              StripBoundary kind, double neumann_sign) {
  using Triplet = Eigen::Triplet<double>;
  const int dofs = m.dofs();
  const double hs = m.length / m.n_s;
  const int first = m.first_layer, last = m.last_layer;

  std::vector<Triplet> ks, ku, pot, itf, bnd;
  const auto add_pair = [](std::vector<Triplet>& t, int i, int j, double c) {
    // c (f_i - f_j)^2
    t.emplace_back(i, i, c);
    t.emplace_back(j, j, c);
    t.emplace_back(i, j, -c);
    t.emplace_back(j, i, -c);
  };

  StripFormParts parts;
  parts.mass.resize(dofs);

  for (int i = 0; i < m.n_s; ++i) {
    const int ip = (i + 1) % m.n_s;
    const double gamma_mid = profile.evaluate(m.s[i] + 0.5 * hs).gamma;
    for (int l = first; l <= last; ++l) {
      const int row = m.index(i, l);
      parts.mass[row] = hs * m.weight[l];
      pot.emplace_back(row, row, hs * m.weight[l] * m.potential(i, l));
      const double g_mid = 1.0 + m.u[l] * gamma_mid;
      add_pair(ks, row, m.index(ip, l), m.weight[l] / (hs * g_mid * g_mid));
    }
    // transverse cells within each half strip
    for (int l = 0; l + 1 < m.layers; ++l) {
      if (l == m.layer_minus()) continue;  // no cell across the interface
      const double c = hs / (m.u[l + 1] - m.u[l]);
      const bool lo = l >= first, hi = l + 1 <= last;
      if (lo && hi) add_pair(ku, m.index(i, l), m.index(i, l + 1), c);
      else if (lo) ku.emplace_back(m.index(i, l), m.index(i, l), c);  // Dirichlet edge cell
      else if (hi) ku.emplace_back(m.index(i, l + 1), m.index(i, l + 1), c);
    }
    // interface: -beta^-1 |f+ - f-|^2 + (gamma/2)(|f+|^2 - |f-|^2)
    const int im = m.index(i, m.layer_minus());
    const int iq = m.index(i, m.layer_plus());
    add_pair(itf, iq, im, -hs / m.beta);
    const double g = profile.evaluate(m.s[i]).gamma;
    itf.emplace_back(iq, iq, 0.5 * hs * g);
    itf.emplace_back(im, im, -0.5 * hs * g);
    if (kind == StripBoundary::Neumann) {
      const int top = m.index(i, m.layers - 1);
      const int bottom = m.index(i, 0);
      bnd.emplace_back(top, top, -neumann_sign * hs * g / (2.0 * (1.0 + m.a * g)));
      bnd.emplace_back(bottom, bottom, neumann_sign * hs * g / (2.0 * (1.0 - m.a * g)));
    }
  }

  const auto build = [dofs](const std::vector<Triplet>& t) {
    SparseMatrixd M(dofs, dofs);
    M.setFromTriplets(t.begin(), t.end());
    return M;
  };
  parts.stiffness_s = build(ks);
  parts.stiffness_u = build(ku);
  parts.potential = build(pot);
  parts.interface = build(itf);
  parts.boundary = build(bnd);
  return parts;
}

StripPencil assemble_form(const GeometryProfile& profile, double beta, double a, StripBoundary kind,
                          const StripOptions& opt) {
  StripPencil p;
  p.kind = kind;
  p.gamma_plus = profile.gamma_plus;
  p.mesh = make_strip_mesh(profile, beta, a, kind, opt);
  const StripFormParts parts = assemble_parts(profile, p.mesh, kind, opt.neumann_sign);
  p.A = parts.stiffness_s + parts.stiffness_u + parts.potential + parts.interface + parts.boundary;
  p.A.makeCompressed();
  p.B.resize(p.mesh.dofs(), p.mesh.dofs());
  std::vector<Eigen::Triplet<double>> diag;
  for (int i = 0; i < p.mesh.dofs(); ++i) diag.emplace_back(i, i, parts.mass[i]);
  p.B.setFromTriplets(diag.begin(), diag.end());
  return p;
}

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrixd, Eigen::Lower, Eigen::AMDOrdering<int>>;

int negative_pivots(const Ldlt& f) {
  return static_cast<int>((f.vectorD().array() < 0.0).count());
}

}  // namespace

int count_below(const StripPencil& pencil, double shift) {
  Ldlt f(pencil.A - shift * pencil.B);
  if (f.info() != Eigen::Success)
    throw Error(ErrorKind::FactorizationFailure, "LDL^T of A - shift B failed");
  return negative_pivots(f);
}

StripSpectrum solve_strip(const StripPencil& pencil, int n_modes, double target) {
  const int n = pencil.mesh.dofs();
  if (n_modes < 1 || n_modes > n / 10)
    throw Error(ErrorKind::ConvergenceFailure, "n_modes must be in [1, dofs/10]");

  double step = 1.0 + pencil.gamma_plus * pencil.gamma_plus;
  double shift = target - step;
  Ldlt factor;
  for (int attempt = 0;; ++attempt) {
    factor.compute(pencil.A - shift * pencil.B);
    if (factor.info() != Eigen::Success)
      throw Error(ErrorKind::FactorizationFailure, "LDL^T of A - shift B failed");
    if (negative_pivots(factor) == 0) break;
    if (attempt > 60) throw Error(ErrorKind::FactorizationFailure, "could not place shift below spectrum");
    step *= 2.0;
    shift = target - step;
  }

  const Eigen::VectorXd mass = pencil.B.diagonal();
  const Eigen::VectorXd root = mass.cwiseSqrt();
  // (C - shift)^{-1} with C = B^{-1/2} A B^{-1/2}
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd y = factor.solve((root.array() * x.array()).matrix());
    return (root.array() * y.array()).matrix();
  };
  const auto res = lanczos_largest<double>(apply, n, n_modes, 1e-13, std::min(n, 20 * n_modes + 200));
  if (!res.converged) throw Error(ErrorKind::ConvergenceFailure, "shift-invert Lanczos did not converge");

  StripSpectrum out;
  out.kind = pencil.kind;
  out.n_s = pencil.mesh.n_s;
  out.n_u = pencil.mesh.n_u;
  out.a = pencil.mesh.a;
  out.beta = pencil.mesh.beta;
  out.shift = shift;
  out.krylov_dim = res.krylov_dim;
  out.eigenvalues.resize(n_modes);
  out.residuals.resize(n_modes);
  out.vectors.resize(n, n_modes);
  for (int i = 0; i < n_modes; ++i) {
    // Lanczos returns theta in descending order, i.e. lambda ascending
    const double lambda = shift + 1.0 / res.values[i];
    Eigen::VectorXd v = (res.vectors.col(i).array() / root.array()).matrix();
    v /= std::sqrt(v.dot(mass.cwiseProduct(v)));
    const Eigen::VectorXd bv = mass.cwiseProduct(v);
    out.eigenvalues[i] = lambda;
    out.residuals[i] = (pencil.A * v - lambda * bv).norm() / (bv.norm() * std::max(1.0, std::abs(lambda)));
    out.vectors.col(i) = v;
  }
  if (out.residuals.maxCoeff() > 1e-8)
    throw Error(ErrorKind::ConvergenceFailure,
                "strip eigenpair residual " + std::to_string(out.residuals.maxCoeff()) + " > 1e-8");
  return out;
}

StripBracket strip_bracket(const GeometryProfile& profile, double beta, double a, int n_modes,
                           const StripOptions& opt) {
  StripOptions coarse = opt;
  coarse.n_s = opt.n_s / 2;
  coarse.n_u = opt.n_u / 2;
  const double target = -4.0 / (beta * beta);

  StripBracket out;
  out.beta = beta;
  out.a = a;
  const auto run = [&](StripBoundary kind, const StripOptions& o) {
    const StripSpectrum sp = solve_strip(assemble_form(profile, beta, a, kind, o), n_modes, target);
    out.max_residual = std::max(out.max_residual, sp.residuals.maxCoeff());
    return sp.eigenvalues;
  };
  out.xi_minus = run(StripBoundary::Neumann, opt);
  out.xi_plus = run(StripBoundary::Dirichlet, opt);
  out.tol_minus = (out.xi_minus - run(StripBoundary::Neumann, coarse)).cwiseAbs();
  out.tol_plus = (out.xi_plus - run(StripBoundary::Dirichlet, coarse)).cwiseAbs();
  return out;
}

InterfaceTraces interface_traces(const StripPencil& pencil, const Eigen::VectorXd& v) {
  const StripMesh& m = pencil.mesh;
  InterfaceTraces t;
  t.minus.resize(m.n_s);
  t.plus.resize(m.n_s);
  for (int i = 0; i < m.n_s; ++i) {
    t.minus[i] = v[m.index(i, m.layer_minus())];
    t.plus[i] = v[m.index(i, m.layer_plus())];
  }
  return t;
}

void write_triplets(std::ostream& os, const StripPencil& p) {
  char buf[96];
  os << "# loopspec strip pencil kind=" << to_string(p.kind) << " n_s=" << p.mesh.n_s
     << " n_u=" << p.mesh.n_u << " dofs=" << p.mesh.dofs() << "\n";
  const auto dump = [&](const SparseMatrixd& M, const char* name) {
    os << "# " << name << " nnz=" << M.nonZeros() << "\n";
    for (int k = 0; k < M.outerSize(); ++k)
      for (SparseMatrixd::InnerIterator it(M, k); it; ++it) {
        std::snprintf(buf, sizeof buf, "%s %lld %lld %.17g\n", name,
                      static_cast<long long>(it.row()), static_cast<long long>(it.col()), it.value());
        os << buf;
      }
  };
  dump(p.A, "A");
  dump(p.B, "B");
}

}  // namespace loopspec
