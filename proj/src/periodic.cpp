#include "loopspec/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "loopspec/lanczos.hpp"

namespace loopspec {

const char* to_string(LongitudinalKind kind) {
  switch (kind) {
    case LongitudinalKind::S: return "S";
    case LongitudinalKind::S0: return "S0";
    case LongitudinalKind::UPlus: return "U_plus";
    case LongitudinalKind::UMinus: return "U_minus";
  }
  return "?";
}

Operator1DSpec make_comparison_operator(const GeometryProfile& profile) {
  Operator1DSpec op;
  op.kind = LongitudinalKind::S;
  op.length = profile.length;
  op.gamma_plus = profile.gamma_plus;
  op.potential = -0.25 * profile.gamma.array().square();
  return op;
}

Operator1DSpec make_free_operator(const GeometryProfile& profile) {
  Operator1DSpec op;
  op.kind = LongitudinalKind::S0;
  op.length = profile.length;
  op.gamma_plus = profile.gamma_plus;
  op.potential = Eigen::VectorXd::Zero(profile.size());
  return op;
}

namespace {

void check_halfwidth(const GeometryProfile& profile, double a) {
  if (!(a > 0.0) || !(a * profile.gamma_plus < 0.5))
    throw Error(ErrorKind::HalfwidthTooLarge,
                "need 0 < a < 1/(2 gamma+) = " + std::to_string(0.5 / profile.gamma_plus) +
                    ", got a = " + std::to_string(a));
}

Eigen::ArrayXd positive_part(const Eigen::VectorXd& v) { return v.array().max(0.0); }

}  // namespace

Operator1DSpec build_u_plus(const GeometryProfile& profile, double a) {
  check_halfwidth(profile, a);
  const double gp = profile.gamma_plus;
  Operator1DSpec op;
  op.kind = LongitudinalKind::UPlus;
  op.length = profile.length;
  op.gamma_plus = gp;
  op.halfwidth = a;
  op.kinetic_prefactor = 1.0 / std::pow(1.0 - a * gp, 2);
  op.potential = (a * positive_part(profile.gamma_double_prime) / (2.0 * std::pow(1.0 - a * gp, 3)) -
                  profile.gamma.array().square() / (4.0 * std::pow(1.0 + a * gp, 2)))
                     .matrix();
  return op;
}

Operator1DSpec build_u_minus(const GeometryProfile& profile, double a) {
  check_halfwidth(profile, a);
  const double gp = profile.gamma_plus;
  Operator1DSpec op;
  op.kind = LongitudinalKind::UMinus;
  op.length = profile.length;
  op.gamma_plus = gp;
  op.halfwidth = a;
  op.kinetic_prefactor = 1.0 / std::pow(1.0 + a * gp, 2);
  const Eigen::ArrayXd gpp = positive_part(profile.gamma_double_prime);
  const Eigen::ArrayXd gp1 = positive_part(profile.gamma_prime);
  op.potential = (-a * gpp / (2.0 * std::pow(1.0 - a * gp, 3)) -
                  5.0 * (a * gp1).square() / (4.0 * std::pow(1.0 - a * gp, 4)) -
                  profile.gamma.array().square() / (4.0 * std::pow(1.0 - a * gp, 2)))
                     .matrix();
  return op;
}

Eigen::VectorXd free_periodic_eigenvalues(double length, int n_modes) {
  Eigen::VectorXd ev(n_modes);
  const double w = std::numbers::pi / length;
  for (int j = 1; j <= n_modes; ++j) {
    const double half = std::floor(j / 2.0);
    ev[j - 1] = 4.0 * half * half * w * w;
  }
  return ev;
}

Eigen::MatrixXd periodic_galerkin_matrix(const Operator1DSpec& spec, int harmonics) {
  const int K = harmonics;
  const int N = static_cast<int>(spec.potential.size());
  // vhat[m] = (1/N) sum_n V_n exp(-2 pi i m n / N), m = 0..2K
  std::vector<std::complex<double>> vhat(2 * K + 1, 0.0);
  {
    Eigen::FFT<double> fft;
    std::vector<double> samples(spec.potential.data(), spec.potential.data() + N);
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, samples);
    for (int m = 0; m <= 2 * K && 2 * m < N; ++m) vhat[m] = spectrum[m] / static_cast<double>(N);
  }
  const auto re = [&](int m) { return vhat[std::abs(m)].real(); };
  const auto im = [&](int m) { return m >= 0 ? vhat[m].imag() : -vhat[-m].imag(); };

  const int dim = 2 * K + 1;
  const auto c = [](int k) { return k; };          // cos index, k = 0..K
  const auto s = [K](int k) { return K + k; };     // sin index, k = 1..K
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  const double sqrt2 = std::numbers::sqrt2;

  H(0, 0) = re(0);
  for (int l = 1; l <= K; ++l) {
    H(c(0), c(l)) = H(c(l), c(0)) = sqrt2 * re(l);
    H(c(0), s(l)) = H(s(l), c(0)) = -sqrt2 * im(l);
  }
  for (int k = 1; k <= K; ++k) {
    for (int l = 1; l <= K; ++l) {
      H(c(k), c(l)) = re(k - l) + re(k + l);
      H(s(k), s(l)) = re(k - l) - re(k + l);
      H(c(k), s(l)) = im(k - l) - im(k + l);
      H(s(l), c(k)) = H(c(k), s(l));
    }
  }
  const double w = 2.0 * std::numbers::pi / spec.length;
  for (int k = 1; k <= K; ++k) {
    const double kin = spec.kinetic_prefactor * (k * w) * (k * w);
    H(c(k), c(k)) += kin;
    H(s(k), s(k)) += kin;
  }
  return H;
}

Spectrum1D solve_periodic(const Operator1DSpec& spec, int n_modes, int n_grid) {
  if (n_modes < 1) throw Error(ErrorKind::GridTooCoarse, "n_modes must be positive");
  if (n_grid < 4 * n_modes)
    throw Error(ErrorKind::GridTooCoarse, "n_grid = " + std::to_string(n_grid) +
                                              " < 4 n_modes = " + std::to_string(4 * n_modes));
  Spectrum1D out;
  out.n_modes = n_modes;
  if (spec.kind == LongitudinalKind::S0) {
    out.eigenvalues = free_periodic_eigenvalues(spec.length, n_modes);
    return out;
  }

  const int K = n_grid / 4;
  const Eigen::MatrixXd H = periodic_galerkin_matrix(spec, K);
  const int dim = static_cast<int>(H.rows());
  out.discretization_size = dim;
  const double scale = std::max(1.0, H.cwiseAbs().rowwise().sum().maxCoeff());

  Eigen::VectorXd values(n_modes);
  Eigen::MatrixXd vectors(dim, n_modes);
  if (dim < 2048) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success)
      throw Error(ErrorKind::ConvergenceFailure, "dense symmetric eigensolver failed");
    values = es.eigenvalues().head(n_modes);
    vectors = es.eigenvectors().leftCols(n_modes);
  } else {
    // shift below the spectrum: V >= min V and the kinetic part is nonnegative
    const double sigma = spec.potential.minCoeff() - 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(H - sigma * Eigen::MatrixXd::Identity(dim, dim));
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::ConvergenceFailure, "shifted Galerkin matrix not positive definite");
    auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return llt.solve(x); };
    const auto res = lanczos_largest<double>(apply, dim, n_modes, 1e-13, std::min(dim, 4 * n_modes + 200));
    if (!res.converged) throw Error(ErrorKind::ConvergenceFailure, "Lanczos did not converge");
    values = (sigma + res.values.array().inverse()).matrix();
    vectors = res.vectors;
    std::vector<int> order(n_modes);
    for (int i = 0; i < n_modes; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    Eigen::VectorXd v2(n_modes);
    Eigen::MatrixXd m2(dim, n_modes);
    for (int i = 0; i < n_modes; ++i) {
      v2[i] = values[order[i]];
      m2.col(i) = vectors.col(order[i]);
    }
    values = v2;
    vectors = m2;
  }

  for (int i = 0; i < n_modes; ++i) {
    const double r = (H * vectors.col(i) - values[i] * vectors.col(i)).norm() / scale;
    out.max_residual = std::max(out.max_residual, r);
  }
  if (out.max_residual > 1e-9)
    throw Error(ErrorKind::ConvergenceFailure,
                "eigenpair residual " + std::to_string(out.max_residual) + " > 1e-9");
  out.eigenvalues = values;
  return out;
}

std::vector<std::vector<int>> multiplets(const Eigen::VectorXd& ev, double tol) {
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < ev.size(); ++i) {
    if (!groups.empty()) {
      const double prev = ev[groups.back().back()];
      if (std::abs(ev[i] - prev) <= tol * std::max(1.0, std::abs(ev[i]))) {
        groups.back().push_back(i);
        continue;
      }
    }
    groups.push_back({i});
  }
  return groups;
}

}  // namespace loopspec
