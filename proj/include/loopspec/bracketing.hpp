#pragma once

// Separated bracketing operators Q+- = U+-(a) (x) I + T+-: their low
// eigenvalues omega+-_j = t1+- + mu+-_j(a(beta)), the negative-eigenvalue
// counts #K+-, and the sweep fits behind the eigenvalue and counting laws.

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "loopspec/curve.hpp"
#include "loopspec/strip.hpp"
#include "loopspec/transverse.hpp"

namespace loopspec {

struct HalfwidthChoice {
  double a = 0.0;
  double unclamped = 0.0;  // -(3/4) beta ln beta
  bool clamped = false;
};

/// a(beta) = -(3/4) beta ln beta, clamped to `cap`. Throws InvalidBeta outside (0, 1).
HalfwidthChoice halfwidth_schedule(double beta,
                                   double cap = std::numeric_limits<double>::infinity());

struct BracketOptions {
  int n_grid_1d = 0;          // 0: 4 n_modes, at least 128
  int transverse_grid = 1024; // cells of the exclusion check discretization
  bool verify_exclusion = true;
};

struct BracketingReport {
  double beta = 0.0;
  HalfwidthChoice halfwidth;
  double length = 0.0, gamma_plus = 0.0;
  bool asymptotic_regime = true;  // false when the a(beta) clamp binds

  TransverseRoot<double> root_plus, root_minus;
  Eigen::VectorXd mu_plus, mu_minus;        // mu+-_j(a)
  Eigen::VectorXd omega_plus, omega_minus;  // t1+- + mu+-_j
  double weyl = 0.0;                        // 2L/(pi beta)

  // exclusion of the k >= 2 transverse modes
  double second_plus = 0.0, second_minus = 0.0;  // lowest discretized t2 over gamma(s) samples
  double gap_bound = 0.0;

  std::vector<int> ordering_violations;  // j (0-based) with omega-_j > omega+_j

  Eigen::VectorXd renormalized_plus() const { return omega_plus.array() + 4.0 / (beta * beta); }
  Eigen::VectorXd renormalized_minus() const { return omega_minus.array() + 4.0 / (beta * beta); }
};

/// Throws HypothesisViolated (beta >= 2a or 2/beta <= gamma+) and
/// ExclusionUnverified (a discretized second transverse eigenvalue < 0).
BracketingReport assemble_bracket(const GeometryProfile& profile, double beta, int n_modes,
                                  const BracketOptions& opt = {});

/// ceil(3L/(pi beta)): window size for the counting sets.
int counting_window(double length, double beta);

struct Counts {
  int plus = 0, minus = 0;
};

/// #K+- = #{j : omega+-_j < 0}; throws WindowTooSmall if the last computed
/// omega is still negative.
Counts count_negative(const BracketingReport& report);

// --- sweep verdicts --------------------------------------------------------

struct Theorem1Row {
  double beta = 0.0, a = 0.0;
  int j = 0;  // 1-based
  double mu = 0.0;
  double omega_minus = 0.0, omega_plus = 0.0;
  double renorm_minus = 0.0, renorm_plus = 0.0;
  double residual = 0.0;  // max |renorm+- - mu|
  double ratio = 0.0;     // residual / (beta |ln beta|)
  bool contains = false;  // renorm- <= mu <= renorm+
  bool asymptotic_regime = true;
  // optional 2D strip data
  bool has_strip = false;
  double xi_minus = 0.0, xi_plus = 0.0, tol_minus = 0.0, tol_plus = 0.0;
  double strip_ratio = 0.0;  // max |xi+- + 4/beta^2 - mu| / (beta |ln beta|)
  bool strip_inside = false;
};

struct FitSummary {
  double least_squares_constant = 0.0;  // argmin_C sum (r - C m)^2
  double max_ratio = 0.0, min_ratio = 0.0;
  bool non_growing = false;  // later ratios stay within 2x the first one
};

struct Theorem1Report {
  std::vector<Theorem1Row> rows;
  std::vector<FitSummary> fits;        // per j
  std::vector<FitSummary> strip_fits;  // per j, when strip data was supplied
  bool containment = false;
  bool rates_bounded = false;
  bool strip_inside = true;
  bool pass = false;
  bool pass_strip = true;
};

struct Theorem1Options {
  int n_modes = 0;  // 0: j_max + 8
  double tolerance_scale = 1.0;  // multiplies the measured strip refinement error
  BracketOptions bracket;
};

/// Comparison eigenvalues mu_1..mu_n used by the sweep.
Eigen::VectorXd comparison_eigenvalues(const GeometryProfile& profile, int n_modes,
                                       const BracketOptions& opt = {});

/// Rows j = 1..j_max for one beta.
std::vector<Theorem1Row> theorem1_rows(const GeometryProfile& profile, double beta,
                                       const Eigen::VectorXd& mu, int j_max,
                                       const StripBracket* strip = nullptr,
                                       const Theorem1Options& opt = {});

/// Fits and verdicts from the rows of a whole sweep (rows grouped by beta, j ascending).
Theorem1Report summarize_theorem1(std::vector<Theorem1Row> rows, int j_max);

Theorem1Report theorem1_verdict(const GeometryProfile& profile, const std::vector<double>& betas,
                                 int j_max, const std::vector<StripBracket>* strip = nullptr,
                                 const Theorem1Options& opt = {});

struct Theorem2Row {
  double beta = 0.0;
  int count_minus = 0, count_plus = 0;
  double weyl = 0.0;
  double deviation_minus = 0.0, deviation_plus = 0.0;  // count - weyl
  double ratio_minus = 0.0, ratio_plus = 0.0;          // |deviation| / |ln beta|
  double weyl_ratio_minus = 0.0, weyl_ratio_plus = 0.0; // count pi beta / (2L)
  bool nested = false;                                  // count+ <= count-
  bool asymptotic_regime = true;
};

struct Theorem2Report {
  std::vector<Theorem2Row> rows;
  double fitted_constant = 0.0;  // max ratio over the sweep
  double ratio_spread = 0.0;     // max ratio / min ratio (both signs)
  bool nested = false;
  bool pass = false;
};

Theorem2Row theorem2_row(const GeometryProfile& profile, double beta,
                         const BracketOptions& opt = {});
Theorem2Report summarize_theorem2(std::vector<Theorem2Row> rows);

Theorem2Report theorem2_verdict(const GeometryProfile& profile, const std::vector<double>& betas,
                                const BracketOptions& opt = {});

FitSummary fit_ratios(const std::vector<double>& residuals, const std::vector<double>& model);

}  // namespace loopspec
