#include "loopspec/transverse.hpp"

#include <limits>
#include <vector>

namespace loopspec {

Eigen::VectorXd halfstrip_nodes(double a, int n_cells, double grading) {
  Eigen::VectorXd u(n_cells + 1);
  for (int k = 0; k <= n_cells; ++k) {
    const double x = static_cast<double>(k) / n_cells;
    u[k] = grading > 1e-8 ? a * std::expm1(grading * x) / std::expm1(grading) : a * x;
  }
  u[n_cells] = a;
  return u;
}

namespace {

// Inverse iteration on a symmetric tridiagonal matrix, shift strictly below
// the lowest eigenvalue so the Thomas sweep needs no pivoting.
Eigen::VectorXd lowest_tridiagonal_vector(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                          double shift) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n).normalized();
  Eigen::VectorXd c(n), d(n);
  for (int it = 0; it < 8; ++it) {
    // solve (T - shift) y = x
    double denom = diag[0] - shift;
    c[0] = n > 1 ? sub[0] / denom : 0.0;
    d[0] = x[0] / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
      denom = diag[i] - shift - sub[i - 1] * c[i - 1];
      c[i] = i + 1 < n ? sub[i] / denom : 0.0;
      d[i] = (x[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    Eigen::VectorXd y(n);
    y[n - 1] = d[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) y[i] = d[i] - c[i] * y[i + 1];
    x = y.normalized();
  }
  return x;
}

// Number of eigenvalues of the tridiagonal (d, e) below x (Sturm sequence).
int count_below(const Eigen::VectorXd& d, const Eigen::VectorXd& e, double x) {
  int count = 0;
  double q = 1.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double off = i > 0 ? e[i - 1] * e[i - 1] : 0.0;
    q = d[i] - x - (i > 0 ? off / q : 0.0);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue (0-based) by bisection on the Sturm count.
double tridiagonal_eigenvalue(const Eigen::VectorXd& d, const Eigen::VectorXd& e, int k) {
  double lo = d[0], hi = d[0];
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  // stop relative to the eigenvalue itself: the Sturm count stays reliable well below eps ||T||
  while (hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (count_below(d, e, mid) > k ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TransverseSpectrum discretize_transverse(const TransverseProblem& pb, int n_grid, int n_eigen) {
  if (n_grid < 32)
    throw Error(ErrorKind::GridTooCoarse, "transverse grid needs >= 32 cells, got " + std::to_string(n_grid));
  if (!(pb.halfwidth > 0.0) || !(pb.beta > 0.0))
    throw Error(ErrorKind::GridTooCoarse, "transverse problem needs a > 0 and beta > 0");

  const int n = n_grid / 2;
  const Eigen::VectorXd half = halfstrip_nodes(pb.halfwidth, n, pb.grading);

  // full node list: -a .. 0- | 0+ .. a
  const int total = 2 * (n + 1);
  Eigen::VectorXd u(total);
  for (int k = 0; k <= n; ++k) {
    u[n - k] = -half[k];
    u[n + 1 + k] = half[k];
  }
  const int im = n, ip = n + 1;

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(total - 1);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(total);

  const auto add_cell = [&](int i, int j, double h) {
    diag[i] += 1.0 / h;
    diag[j] += 1.0 / h;
    off[std::min(i, j)] -= 1.0 / h;
    mass[i] += 0.5 * h;
    mass[j] += 0.5 * h;
  };
  for (int i = 0; i < n; ++i) add_cell(i, i + 1, u[i + 1] - u[i]);
  for (int i = ip; i < total - 1; ++i) add_cell(i, i + 1, u[i + 1] - u[i]);

  const double ib = 1.0 / pb.beta;
  diag[im] -= ib;
  diag[ip] -= ib;
  off[im] += ib;  // coupling between the two interface unknowns
  diag[ip] += pb.jump_sign * 0.5 * pb.gamma_s;
  diag[im] -= pb.jump_sign * 0.5 * pb.gamma_s;

  int first = 0, last = total - 1;
  if (pb.outer == OuterBoundary::Robin) {
    diag[0] += pb.gamma_plus;
    diag[total - 1] += pb.gamma_plus;
  } else {
    first = 1;
    last = total - 2;
  }

  const int m = last - first + 1;
  Eigen::VectorXd d(m), e(m - 1), w(m);
  for (int i = 0; i < m; ++i) {
    w[i] = mass[first + i];
    d[i] = diag[first + i] / w[i];
  }
  for (int i = 0; i + 1 < m; ++i) e[i] = off[first + i] / std::sqrt(w[i] * w[i + 1]);

  TransverseSpectrum out;
  if (n_eigen <= 0 || n_eigen >= m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw Error(ErrorKind::ConvergenceFailure, "tridiagonal eigensolver failed");
    out.eigenvalues = es.eigenvalues();
  } else {
    out.eigenvalues.resize(n_eigen);
    for (int k = 0; k < n_eigen; ++k) out.eigenvalues[k] = tridiagonal_eigenvalue(d, e, k);
  }
  out.nodes = u.segment(first, m);
  out.interface_minus = im - first;
  out.interface_plus = ip - first;

  const double lam = out.eigenvalues[0];
  const double gap = out.eigenvalues.size() > 1 ? out.eigenvalues[1] - lam : 1.0;
  const Eigen::VectorXd y = lowest_tridiagonal_vector(d, e, lam - 1e-6 * std::max(gap, 1e-12));
  out.ground_state = (y.array() / w.array().sqrt()).matrix();
  return out;
}

}  // namespace loopspec
