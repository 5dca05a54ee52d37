#include "loopspec/bracketing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "loopspec/periodic.hpp"

namespace loopspec {

HalfwidthChoice halfwidth_schedule(double beta, double cap) {
  if (!(beta > 0.0) || !(beta < 1.0))
    throw Error(ErrorKind::InvalidBeta, "a(beta) needs 0 < beta < 1, got " + std::to_string(beta));
  HalfwidthChoice h;
  h.unclamped = -0.75 * beta * std::log(beta);
  h.a = std::min(h.unclamped, cap);
  h.clamped = h.unclamped > cap;
  return h;
}

int counting_window(double length, double beta) {
  return static_cast<int>(std::ceil(3.0 * length / (std::numbers::pi * beta)));
}

namespace {

double second_transverse(double a, double beta, OuterBoundary outer, double gamma_plus,
                         double jump_sign, int cells) {
  double lowest = std::numeric_limits<double>::infinity();
  for (double gs : {-gamma_plus, 0.0, gamma_plus}) {
    TransverseProblem pb;
    pb.halfwidth = a;
    pb.beta = beta;
    pb.outer = outer;
    pb.gamma_plus = gamma_plus;
    pb.gamma_s = gs;
    pb.jump_sign = jump_sign;
    pb.grading = std::min(2.0 * a / beta, 8.0);
    const TransverseSpectrum sp = discretize_transverse(pb, cells);
    lowest = std::min(lowest, sp.eigenvalues[1]);
  }
  return lowest;
}

}  // namespace

BracketingReport assemble_bracket(const GeometryProfile& profile, double beta, int n_modes,
                                  const BracketOptions& opt) {
  BracketingReport r;
  r.beta = beta;
  r.length = profile.length;
  r.gamma_plus = profile.gamma_plus;
  r.halfwidth = halfwidth_schedule(beta, profile.max_halfwidth);
  r.asymptotic_regime = !r.halfwidth.clamped;
  const double a = r.halfwidth.a;

  if (!(beta < 2.0 * a))
    throw Error(ErrorKind::HypothesisViolated,
                "beta = " + std::to_string(beta) + " >= 2 a(beta) = " + std::to_string(2.0 * a));
  if (!(2.0 / beta > profile.gamma_plus))
    throw Error(ErrorKind::HypothesisViolated, "2/beta <= gamma+");

  r.root_plus = solve_dirichlet_root(a, beta);
  r.root_minus = solve_robin_root(a, beta, profile.gamma_plus);

  const int n_grid = opt.n_grid_1d > 0 ? opt.n_grid_1d : std::max(4 * n_modes, 128);
  r.mu_plus = solve_periodic(build_u_plus(profile, a), n_modes, n_grid).eigenvalues;
  r.mu_minus = solve_periodic(build_u_minus(profile, a), n_modes, n_grid).eigenvalues;
  r.omega_plus = (r.root_plus.eigenvalue + r.mu_plus.array()).matrix();
  r.omega_minus = (r.root_minus.eigenvalue + r.mu_minus.array()).matrix();
  r.weyl = 2.0 * profile.length / (std::numbers::pi * beta);

  for (int j = 0; j < n_modes; ++j)
    if (r.omega_minus[j] > r.omega_plus[j]) r.ordering_violations.push_back(j);

  r.gap_bound = robin_gap_bound(a, beta, profile.gamma_plus);
  if (opt.verify_exclusion) {
    r.second_plus = second_transverse(a, beta, OuterBoundary::Dirichlet, profile.gamma_plus, 1.0,
                                      opt.transverse_grid);
    r.second_minus = second_transverse(a, beta, OuterBoundary::Robin, profile.gamma_plus, -1.0,
                                       opt.transverse_grid);
    if (r.second_plus < 0.0 || r.second_minus < 0.0)
      throw Error(ErrorKind::ExclusionUnverified,
                  "second transverse eigenvalue negative: t2+ = " + std::to_string(r.second_plus) +
                      ", t2- = " + std::to_string(r.second_minus));
  }
  return r;
}

Counts count_negative(const BracketingReport& r) {
  const auto count = [](const Eigen::VectorXd& w, const char* which) {
    if (w.size() == 0 || w[w.size() - 1] < 0.0)
      throw Error(ErrorKind::WindowTooSmall,
                  std::string("largest computed omega") + which + " is still negative");
    return static_cast<int>((w.array() < 0.0).count());
  };
  return {count(r.omega_plus, "+"), count(r.omega_minus, "-")};
}

FitSummary fit_ratios(const std::vector<double>& residuals, const std::vector<double>& model) {
  FitSummary f;
  double num = 0.0, den = 0.0;
  f.max_ratio = 0.0;
  f.min_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> ratio(residuals.size());
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    num += residuals[k] * model[k];
    den += model[k] * model[k];
    ratio[k] = residuals[k] / model[k];
    f.max_ratio = std::max(f.max_ratio, ratio[k]);
    f.min_ratio = std::min(f.min_ratio, ratio[k]);
  }
  f.least_squares_constant = den > 0.0 ? num / den : 0.0;
  f.non_growing = !ratio.empty();
  for (std::size_t k = 1; k < ratio.size(); ++k)
    if (ratio[k] > 2.0 * std::max(ratio[0], 1e-12)) f.non_growing = false;
  return f;
}

Eigen::VectorXd comparison_eigenvalues(const GeometryProfile& profile, int n_modes,
                                       const BracketOptions& opt) {
  const int n_grid = opt.n_grid_1d > 0 ? opt.n_grid_1d : std::max(4 * n_modes, 128);
  return solve_periodic(make_comparison_operator(profile), n_modes, n_grid).eigenvalues;
}

std::vector<Theorem1Row> theorem1_rows(const GeometryProfile& profile, double beta,
                                       const Eigen::VectorXd& mu, int j_max,
                                       const StripBracket* strip, const Theorem1Options& opt) {
  const int n_modes = opt.n_modes > 0 ? opt.n_modes : j_max + 8;
  if (mu.size() < j_max || n_modes < j_max)
    throw Error(ErrorKind::Config, "fewer modes than j_max");
  if (strip && strip->xi_minus.size() < j_max)
    throw Error(ErrorKind::Config, "strip results hold fewer than j_max modes");
  const BracketingReport br = assemble_bracket(profile, beta, n_modes, opt.bracket);
  const Eigen::VectorXd rp = br.renormalized_plus(), rm = br.renormalized_minus();
  const double shift = 4.0 / (beta * beta);
  const double m = beta * std::abs(std::log(beta));

  std::vector<Theorem1Row> rows;
  for (int j = 0; j < j_max; ++j) {
    Theorem1Row row;
    row.beta = beta;
    row.a = br.halfwidth.a;
    row.j = j + 1;
    row.mu = mu[j];
    row.omega_minus = br.omega_minus[j];
    row.omega_plus = br.omega_plus[j];
    row.renorm_minus = rm[j];
    row.renorm_plus = rp[j];
    row.residual = std::max(std::abs(rp[j] - mu[j]), std::abs(rm[j] - mu[j]));
    row.ratio = row.residual / m;
    row.contains = rm[j] <= mu[j] && mu[j] <= rp[j];
    row.asymptotic_regime = br.asymptotic_regime;
    if (strip) {
      row.has_strip = true;
      row.xi_minus = strip->xi_minus[j];
      row.xi_plus = strip->xi_plus[j];
      row.tol_minus = opt.tolerance_scale * strip->tol_minus[j];
      row.tol_plus = opt.tolerance_scale * strip->tol_plus[j];
      row.strip_inside = row.omega_minus - row.tol_minus <= row.xi_minus &&
                         row.xi_minus <= row.xi_plus + std::max(row.tol_minus, row.tol_plus) &&
                         row.xi_plus <= row.omega_plus + row.tol_plus;
      const double sr = std::max(std::abs(row.xi_minus + shift - mu[j]),
                                 std::abs(row.xi_plus + shift - mu[j]));
      row.strip_ratio = sr / m;
    }
    rows.push_back(row);
  }
  return rows;
}

Theorem1Report summarize_theorem1(std::vector<Theorem1Row> rows, int j_max) {
  Theorem1Report rep;
  rep.rows = std::move(rows);
  rep.containment = !rep.rows.empty();
  rep.rates_bounded = !rep.rows.empty();
  const bool has_strip = !rep.rows.empty() && rep.rows.front().has_strip;
  rep.strip_inside = has_strip;
  rep.pass_strip = has_strip;
  for (const Theorem1Row& r : rep.rows) {
    rep.containment = rep.containment && r.contains;
    if (has_strip) rep.strip_inside = rep.strip_inside && r.strip_inside;
  }
  for (int j = 1; j <= j_max; ++j) {
    std::vector<double> res, sres, model;
    for (const Theorem1Row& r : rep.rows) {
      if (r.j != j) continue;
      const double m = r.beta * std::abs(std::log(r.beta));
      res.push_back(r.residual);
      sres.push_back(r.strip_ratio * m);
      model.push_back(m);
    }
    rep.fits.push_back(fit_ratios(res, model));
    rep.rates_bounded = rep.rates_bounded && rep.fits.back().non_growing;
    if (has_strip) {
      rep.strip_fits.push_back(fit_ratios(sres, model));
      rep.pass_strip = rep.pass_strip && rep.strip_fits.back().non_growing;
    }
  }
  rep.pass_strip = rep.pass_strip && rep.strip_inside;
  rep.pass = rep.containment && rep.rates_bounded;
  return rep;
}

Theorem1Report theorem1_verdict(const GeometryProfile& profile, const std::vector<double>& betas,
                                int j_max, const std::vector<StripBracket>* strip,
                                const Theorem1Options& opt) {
  if (betas.empty()) throw Error(ErrorKind::Config, "empty beta sweep");
  if (strip && strip->size() != betas.size())
    throw Error(ErrorKind::Config, "strip results must match the beta sweep");
  const int n_modes = opt.n_modes > 0 ? opt.n_modes : j_max + 8;
  const Eigen::VectorXd mu = comparison_eigenvalues(profile, n_modes, opt.bracket);
  std::vector<Theorem1Row> rows;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    auto part = theorem1_rows(profile, betas[b], mu, j_max, strip ? &(*strip)[b] : nullptr, opt);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return summarize_theorem1(std::move(rows), j_max);
}

Theorem2Row theorem2_row(const GeometryProfile& profile, double beta, const BracketOptions& opt) {
  const int window = counting_window(profile.length, beta);
  const BracketingReport br = assemble_bracket(profile, beta, window, opt);
  const Counts c = count_negative(br);
  Theorem2Row row;
  row.beta = beta;
  row.count_minus = c.minus;
  row.count_plus = c.plus;
  row.weyl = br.weyl;
  row.deviation_minus = c.minus - br.weyl;
  row.deviation_plus = c.plus - br.weyl;
  const double log_beta = std::abs(std::log(beta));
  row.ratio_minus = std::abs(row.deviation_minus) / log_beta;
  row.ratio_plus = std::abs(row.deviation_plus) / log_beta;
  row.weyl_ratio_minus = c.minus / br.weyl;
  row.weyl_ratio_plus = c.plus / br.weyl;
  row.nested = c.plus <= c.minus;
  row.asymptotic_regime = br.asymptotic_regime;
  return row;
}

Theorem2Report summarize_theorem2(std::vector<Theorem2Row> rows) {
  Theorem2Report rep;
  rep.rows = std::move(rows);
  rep.nested = !rep.rows.empty();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const Theorem2Row& row : rep.rows) {
    rep.nested = rep.nested && row.nested;
    hi = std::max({hi, row.ratio_minus, row.ratio_plus});
    lo = std::min({lo, row.ratio_minus, row.ratio_plus});
  }
  rep.fitted_constant = hi;
  rep.ratio_spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  rep.pass = rep.nested && rep.ratio_spread < 3.0;
  return rep;
}

Theorem2Report theorem2_verdict(const GeometryProfile& profile, const std::vector<double>& betas,
                                const BracketOptions& opt) {
  if (betas.empty()) throw Error(ErrorKind::Config, "empty beta sweep");
  std::vector<Theorem2Row> rows;
  for (double beta : betas) rows.push_back(theorem2_row(profile, beta, opt));
  return summarize_theorem2(std::move(rows));
}

}  // namespace loopspec
