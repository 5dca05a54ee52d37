#include "loopspec/curve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace loopspec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// k-th derivative of  c cos(mt) + d sin(mt).
double trig_derivative(double c, double d, int m, int k, double t) {
  const double phase = m * t + k * std::numbers::pi / 2.0;
  return std::pow(static_cast<double>(m), k) * (c * std::cos(phase) + d * std::sin(phase));
}

CurveJet circle_jet(const CircleParams& p, double t) {
  CurveJet j;
  for (int k = 0; k < 5; ++k) {
    j[k] = {trig_derivative(p.radius, 0.0, 1, k, t), trig_derivative(0.0, p.radius, 1, k, t)};
  }
  return j;
}

CurveJet ellipse_jet(const EllipseParams& p, double t) {
  CurveJet j;
  for (int k = 0; k < 5; ++k) {
    j[k] = {trig_derivative(p.semi_a, 0.0, 1, k, t), trig_derivative(0.0, p.semi_b, 1, k, t)};
  }
  return j;
}

CurveJet fourier_jet(const FourierParams& p, double t) {
  CurveJet j;
  for (auto& v : j) v.setZero();
  const auto coeff = [](const std::vector<double>& c, std::size_t m) {
    return m < c.size() ? c[m] : 0.0;
  };
  const std::size_t modes =
      std::max({p.x_cos.size(), p.x_sin.size(), p.y_cos.size(), p.y_sin.size()});
  for (std::size_t m = 0; m < modes; ++m) {
    const double xs = m == 0 ? 0.0 : coeff(p.x_sin, m);
    const double ys = m == 0 ? 0.0 : coeff(p.y_sin, m);
    for (int k = 0; k < 5; ++k) {
      if (m == 0 && k > 0) break;
      j[k].x() += trig_derivative(coeff(p.x_cos, m), xs, static_cast<int>(m), k, t);
      j[k].y() += trig_derivative(coeff(p.y_cos, m), ys, static_cast<int>(m), k, t);
    }
  }
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Curve

Curve Curve::circle(double radius, Orientation o) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Config, "circle radius must be positive");
  return Curve(CircleParams{radius}, o);
}

Curve Curve::ellipse(double semi_a, double semi_b, Orientation o) {
  if (!(semi_a > 0.0) || !(semi_b > 0.0))
    throw Error(ErrorKind::Config, "ellipse semi-axes must be positive");
  return Curve(EllipseParams{semi_a, semi_b}, o);
}

Curve Curve::fourier(FourierParams coeffs, Orientation o) {
  const auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!all_finite(coeffs.x_cos) || !all_finite(coeffs.x_sin) || !all_finite(coeffs.y_cos) ||
      !all_finite(coeffs.y_sin))
    throw Error(ErrorKind::Config, "Fourier coefficients must be finite");
  if (std::max({coeffs.x_cos.size(), coeffs.x_sin.size(), coeffs.y_cos.size(),
                coeffs.y_sin.size()}) < 2)
    throw Error(ErrorKind::Config, "Fourier curve needs at least one k >= 1 term");
  return Curve(std::move(coeffs), o);
}

CurveJet Curve::jet(double t) const {
  const bool reversed = orientation_ == Orientation::Clockwise;
  const double tt = reversed ? -t : t;
  CurveJet j = std::visit(
      [tt](const auto& p) -> CurveJet {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CircleParams>) return circle_jet(p, tt);
        else if constexpr (std::is_same_v<P, EllipseParams>) return ellipse_jet(p, tt);
        else return fourier_jet(p, tt);
      },
      shape_);
  if (reversed) {
    j[1] = -j[1];
    j[3] = -j[3];
  }
  return j;
}

double Curve::raw_period() const { return kTwoPi; }

std::string Curve::kind_name() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, CircleParams>) return "circle";
        else if constexpr (std::is_same_v<P, EllipseParams>) return "ellipse";
        else return "fourier";
      },
      shape_);
}

double Curve::seam_mismatch() const {
  const CurveJet a = jet(0.0);
  const CurveJet b = jet(raw_period());
  double scale = 0.0, diff = 0.0;
  for (int k = 0; k < 5; ++k) {
    scale = std::max(scale, a[k].norm());
    diff = std::max(diff, (a[k] - b[k]).norm());
  }
  return diff / std::max(scale, 1e-300);
}

// ---------------------------------------------------------------------------
// ArcLengthMap

ArcLengthMap::ArcLengthMap(Curve curve) : curve_(std::move(curve)) {
  Eigen::FFT<double> fft;
  std::vector<double> speed;
  std::vector<std::complex<double>> spectrum;

  for (int m = 64;; m *= 2) {
    speed.resize(m);
    for (int n = 0; n < m; ++n) {
      const double t = kTwoPi * n / m;
      speed[n] = curve_.jet(t)[1].norm();
      if (!(speed[n] > 1e-12))
        throw Error(ErrorKind::DegenerateSpeed,
                    "|Gamma'(t)| = " + std::to_string(speed[n]) + " at t = " + std::to_string(t));
    }
    fft.fwd(spectrum, speed);
    mean_speed_ = spectrum[0].real() / m;
    double tail = 0.0;
    for (int k = m / 4; k < m / 2; ++k) tail = std::max(tail, std::abs(spectrum[k]) / m);
    if (tail < 1e-16 * mean_speed_ || m >= (1 << 16)) {
      int keep = m / 2 - 1;
      while (keep > 0 && std::abs(spectrum[keep]) / m < 1e-18 * mean_speed_) --keep;
      speed_cos_.resize(keep);
      speed_sin_.resize(keep);
      for (int k = 1; k <= keep; ++k) {
        speed_cos_[k - 1] = 2.0 * spectrum[k].real() / m;
        speed_sin_[k - 1] = -2.0 * spectrum[k].imag() / m;
      }
      break;
    }
  }
  length_ = kTwoPi * mean_speed_;
}

double ArcLengthMap::arc_length(double t) const {
  double s = mean_speed_ * t;
  for (std::size_t i = 0; i < speed_cos_.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    s += speed_cos_[i] / k * std::sin(k * t) + speed_sin_[i] / k * (1.0 - std::cos(k * t));
  }
  return s;
}

double ArcLengthMap::raw_parameter(double s) const {
  s = std::fmod(s, length_);
  if (s < 0.0) s += length_;
  double lo = 0.0, hi = kTwoPi;
  double t = s / mean_speed_;
  for (int it = 0; it < 100; ++it) {
    const double f = arc_length(t) - s;
    if (f > 0.0) hi = std::min(hi, t);
    else lo = std::max(lo, t);
    double speed = mean_speed_;
    for (std::size_t i = 0; i < speed_cos_.size(); ++i) {
      const double k = static_cast<double>(i + 1);
      speed += speed_cos_[i] * std::cos(k * t) + speed_sin_[i] * std::sin(k * t);
    }
    double next = t - f / speed;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) < 1e-15 * kTwoPi) return next;
    t = next;
  }
  return t;
}

Eigen::VectorXd ArcLengthMap::sample(int n_samples) const {
  Eigen::VectorXd t(n_samples);
  for (int n = 0; n < n_samples; ++n) t[n] = raw_parameter(length_ * n / n_samples);
  return t;
}

// ---------------------------------------------------------------------------
// Arc-length geometry

ArcPoint evaluate_arc_point(const ArcLengthMap& map, double s) {
  ArcPoint p;
  p.s = s;
  p.t = map.raw_parameter(s);
  const CurveJet j = map.curve().jet(p.t);
  const Eigen::Vector2d& v = j[1];
  const Eigen::Vector2d& w = j[2];
  const Eigen::Vector2d& z = j[3];
  const Eigen::Vector2d& y4 = j[4];

  const double q = v.squaredNorm();
  const double speed = std::sqrt(q);
  p.position = j[0];
  p.tangent = v / speed;
  p.second = (w - (v.dot(w) / q) * v) / q;

  // gamma = -(x'y'' - x''y') / |v|^3 and its t-derivatives.
  const double n0 = -cross(v, w);
  const double n1 = -cross(v, z);
  const double n2 = -(cross(w, z) + cross(v, y4));
  const double q1 = 2.0 * v.dot(w);
  const double q2 = 2.0 * (w.squaredNorm() + v.dot(z));
  const double d0 = q * speed;
  const double d1 = 1.5 * speed * q1;
  const double d2 = 0.75 * q1 * q1 / speed + 1.5 * speed * q2;

  const double k0 = n0 / d0;
  const double k1 = (n1 * d0 - n0 * d1) / (d0 * d0);
  const double k2 = (n2 * d0 - n0 * d2) / (d0 * d0) - 2.0 * d1 * (n1 * d0 - n0 * d1) / (d0 * d0 * d0);
  const double speed_t = q1 / (2.0 * speed);

  p.gamma = k0;
  p.gamma_prime = k1 / speed;
  p.gamma_double_prime = (k2 / speed - k1 * speed_t / q) / speed;
  return p;
}

ArcPoint GeometryProfile::evaluate(double s) const { return evaluate_arc_point(*map_, s); }

ArcLengthSamples arc_length_reparametrize(const Curve& curve, int n_samples) {
  if (n_samples < 1) throw Error(ErrorKind::TooFewSamples, "n_samples must be positive");
  const ArcLengthMap map(curve);
  ArcLengthSamples out;
  out.length = map.length();
  out.s = Eigen::VectorXd::LinSpaced(n_samples, 0.0, map.length() * (n_samples - 1) / n_samples);
  out.t = map.sample(n_samples);
  return out;
}

namespace {

// Pairwise scan: returns (min distance over pairs beyond the self-intersection
// window, min distance over pairs beyond the reach threshold).
struct PairScan {
  double near_min = INFINITY;
  double reach_min = INFINITY;
};

PairScan scan_pairs(const Eigen::Matrix2Xd& pts, double length, double reach_arc) {
  const int n = static_cast<int>(pts.cols());
  const double h = length / n;
  PairScan r;
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const double sep = std::min(k - i, n - (k - i)) * h;
      if (sep <= 4.0 * h) continue;
      const double d = (pts.col(i) - pts.col(k)).norm();
      r.near_min = std::min(r.near_min, d);
      if (sep >= reach_arc) r.reach_min = std::min(r.reach_min, d);
    }
  }
  return r;
}

double sup_abs_curvature(const ArcLengthMap& map) {
  const int m = 4096;
  const double h = map.length() / m;
  double best = 0.0, best_s = 0.0;
  for (int n = 0; n < m; ++n) {
    const double g = std::abs(evaluate_arc_point(map, n * h).gamma);
    if (g > best) {
      best = g;
      best_s = n * h;
    }
  }
  // golden-section polish of |gamma| around the best sample
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = best_s - h, b = best_s + h;
  auto f = [&](double s) { return std::abs(evaluate_arc_point(map, s).gamma); };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      b = d; d = c; fd = fc; c = b - phi * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + phi * (b - a); fd = f(d);
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace

GeometryProfile build_profile(const Curve& curve, int n_samples) {
  if (n_samples < 16)
    throw Error(ErrorKind::TooFewSamples, "need at least 16 samples, got " + std::to_string(n_samples));
  const double seam = curve.seam_mismatch();
  if (seam > 1e-10) throw Error(ErrorKind::NotClosed, "seam mismatch " + std::to_string(seam));

  GeometryProfile p;
  p.map_ = std::make_shared<const ArcLengthMap>(curve);
  const ArcLengthMap& map = *p.map_;
  p.length = map.length();

  const int n = n_samples;
  p.s_grid.resize(n);
  p.t_grid.resize(n);
  p.position.resize(2, n);
  p.tangent.resize(2, n);
  p.second.resize(2, n);
  p.gamma.resize(n);
  p.gamma_prime.resize(n);
  p.gamma_double_prime.resize(n);
  for (int i = 0; i < n; ++i) {
    const ArcPoint a = evaluate_arc_point(map, p.length * i / n);
    p.s_grid[i] = a.s;
    p.t_grid[i] = a.t;
    p.position.col(i) = a.position;
    p.tangent.col(i) = a.tangent;
    p.second.col(i) = a.second;
    p.gamma[i] = a.gamma;
    p.gamma_prime[i] = a.gamma_prime;
    p.gamma_double_prime[i] = a.gamma_double_prime;
  }
  p.gamma_plus = std::max(sup_abs_curvature(map), p.gamma.cwiseAbs().maxCoeff());

  // validation grid, capped so the quadratic scan stays cheap
  const int m = std::min(n, 2048);
  Eigen::Matrix2Xd pts(2, m);
  for (int i = 0; i < m; ++i) pts.col(i) = curve.point(map.raw_parameter(p.length * i / m));
  const double reach_arc = 0.5 * std::min(std::numbers::pi / p.gamma_plus, 0.5 * p.length);
  const PairScan scan = scan_pairs(pts, p.length, reach_arc);
  if (scan.near_min <= p.length / m)
    throw Error(ErrorKind::SelfIntersecting,
                "non-adjacent samples only " + std::to_string(scan.near_min) + " apart");

  const double curvature_cap = 0.5 / p.gamma_plus;
  p.max_halfwidth = std::isfinite(scan.reach_min) ? std::min(curvature_cap, 0.5 * scan.reach_min)
                                                  : curvature_cap;
  return p;
}

Eigen::Vector2d tube_map(const GeometryProfile& profile, double s, double u) {
  if (!(std::abs(u) < profile.max_halfwidth))
    throw Error(ErrorKind::OffsetTooLarge, "|u| = " + std::to_string(std::abs(u)) +
                                               " >= max halfwidth " +
                                               std::to_string(profile.max_halfwidth));
  const ArcPoint a = profile.evaluate(s);
  return {a.position.x() + u * a.tangent.y(), a.position.y() - u * a.tangent.x()};
}

double max_injectivity_halfwidth(const GeometryProfile& profile) { return profile.max_halfwidth; }

ProfileChecks check_profile(const GeometryProfile& p) {
  ProfileChecks c;
  for (int i = 0; i < p.size(); ++i) {
    c.unit_speed_error = std::max(c.unit_speed_error, std::abs(p.tangent.col(i).squaredNorm() - 1.0));
    c.curvature_identity_error =
        std::max(c.curvature_identity_error,
                 std::abs(p.gamma[i] * p.gamma[i] - p.second.col(i).squaredNorm()));
  }
  // trapezoid on a periodic grid is spectrally accurate
  c.total_curvature = p.gamma.sum() * p.length / p.size();
  const double expected =
      p.map().curve().orientation() == Orientation::CounterClockwise ? -kTwoPi : kTwoPi;
  c.turning_number_error = std::abs(c.total_curvature - expected);
  return c;
}

}  // namespace loopspec
