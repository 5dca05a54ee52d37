#pragma once

// Lanczos iteration with full reorthogonalization for the largest eigenpairs
// of a symmetric operator given only through its action. Used in
// shift-invert mode: apply = (A - sigma I)^{-1}, largest theta <-> eigenvalue
// sigma + 1/theta closest to sigma from above.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace loopspec {

template <typename Scalar>
struct LanczosResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
  bool converged = false;
  int krylov_dim = 0;
};

/// Deterministic start vector (no RNG state, identical on every platform).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lanczos_start_vector(Eigen::Index n) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = Scalar(1) + Scalar(0.5) * std::sin(Scalar(1.618033988749895) * Scalar(i + 1)) +
           Scalar(0.25) * std::cos(Scalar(0.7071067811865476) * Scalar(i * i % 1009));
  return v.normalized();
}

template <typename Scalar, typename Apply>
LanczosResult<Scalar> lanczos_largest(Apply&& apply, Eigen::Index n, int k, Scalar tol,
                                      int max_dim) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  LanczosResult<Scalar> out;
  max_dim = static_cast<int>(std::min<Eigen::Index>(max_dim, n));
  int dim = std::min(max_dim, std::max(2 * k + 20, 40));

  while (true) {
    Mat basis(n, dim);
    Vec alpha(dim), beta(dim);
    basis.col(0) = lanczos_start_vector<Scalar>(n);
    int m = dim;
    for (int j = 0; j < dim; ++j) {
      Vec w = apply(basis.col(j));
      alpha[j] = basis.col(j).dot(w);
      // two passes of classical Gram-Schmidt against the whole basis
      for (int pass = 0; pass < 2; ++pass) {
        const Vec h = basis.leftCols(j + 1).transpose() * w;
        w.noalias() -= basis.leftCols(j + 1) * h;
      }
      beta[j] = w.norm();
      if (j + 1 == dim) break;
      if (beta[j] < Scalar(1e-14) * std::max(Scalar(1), std::abs(alpha[j]))) {
        m = j + 1;  // invariant subspace found
        break;
      }
      basis.col(j + 1) = w / beta[j];
    }

    Mat tri = Mat::Zero(m, m);
    for (int j = 0; j < m; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(tri);
    const int kk = std::min(k, m);
    bool ok = true;
    for (int i = 0; i < kk; ++i) {
      const int col = m - 1 - i;
      const Scalar theta = es.eigenvalues()[col];
      const Scalar ritz_residual = std::abs(beta[m - 1] * es.eigenvectors()(m - 1, col));
      if (m < n && ritz_residual > tol * std::abs(theta)) ok = false;
    }
    if (ok || dim >= max_dim) {
      out.values.resize(kk);
      out.vectors.resize(n, kk);
      for (int i = 0; i < kk; ++i) {
        const int col = m - 1 - i;
        out.values[i] = es.eigenvalues()[col];
        out.vectors.col(i) = (basis.leftCols(m) * es.eigenvectors().col(col)).normalized();
      }
      out.converged = ok;
      out.krylov_dim = m;
      return out;
    }
    dim = std::min(max_dim, dim * 2);
  }
}

}  // namespace loopspec
