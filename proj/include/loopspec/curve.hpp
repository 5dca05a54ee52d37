#pragma once

// Closed planar curves, arc-length parametrization and the sampled geometry
// (signed curvature and its first two arc-length derivatives) that the
// longitudinal and strip operators are built from.

#include <array>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "loopspec/error.hpp"

namespace loopspec {

enum class Orientation { CounterClockwise, Clockwise };

struct CircleParams {
  double radius = 1.0;
};

struct EllipseParams {
  double semi_a = 2.0;
  double semi_b = 1.0;
};

/// Truncated Fourier series in the raw parameter t in [0, 2pi):
///   x(t) = sum_k x_cos[k] cos(kt) + x_sin[k] sin(kt), same for y.
/// Index 0 of the sine arrays is ignored.
struct FourierParams {
  std::vector<double> x_cos, x_sin, y_cos, y_sin;
};

/// Value and first four raw-parameter derivatives of the curve at one t.
using CurveJet = std::array<Eigen::Vector2d, 5>;

class Curve {
 public:
  using Shape = std::variant<CircleParams, EllipseParams, FourierParams>;

  static Curve circle(double radius, Orientation o = Orientation::CounterClockwise);
  static Curve ellipse(double semi_a, double semi_b,
                       Orientation o = Orientation::CounterClockwise);
  static Curve fourier(FourierParams coeffs,
                       Orientation o = Orientation::CounterClockwise);

  CurveJet jet(double t) const;
  Eigen::Vector2d point(double t) const { return jet(t)[0]; }

  double raw_period() const;
  Orientation orientation() const { return orientation_; }
  const Shape& shape() const { return shape_; }
  std::string kind_name() const;

  /// Largest relative mismatch of the 0..4th derivatives between t=0 and t=T.
  double seam_mismatch() const;

 private:
  Curve(Shape shape, Orientation o) : shape_(std::move(shape)), orientation_(o) {}

  Shape shape_;
  Orientation orientation_;
};

/// Arc-length map of a regular closed curve. The speed |Gamma'(t)| is
/// expanded in a Fourier series (resolved to round-off), integrated
/// termwise for s(t) and inverted by safeguarded Newton for t(s).
class ArcLengthMap {
 public:
  explicit ArcLengthMap(Curve curve);

  double length() const { return length_; }
  const Curve& curve() const { return curve_; }

  double arc_length(double t) const;
  double raw_parameter(double s) const;

  /// Raw parameter samples t(s_n) on the uniform grid s_n = n L / n_samples.
  Eigen::VectorXd sample(int n_samples) const;

  int speed_modes() const { return static_cast<int>(speed_cos_.size()); }

 private:
  Curve curve_;
  double length_ = 0.0;
  double mean_speed_ = 0.0;
  std::vector<double> speed_cos_, speed_sin_;  // k = 1..K
};

/// Geometry at one arc-length position.
struct ArcPoint {
  double s = 0.0;
  double t = 0.0;
  Eigen::Vector2d position, tangent, second;  // Gamma, Gamma', Gamma'' in s
  double gamma = 0.0;                         // Gamma1'' Gamma2' - Gamma1' Gamma2''
  double gamma_prime = 0.0;
  double gamma_double_prime = 0.0;
};

class GeometryProfile {
 public:
  Eigen::VectorXd s_grid;
  Eigen::VectorXd t_grid;
  Eigen::Matrix2Xd position, tangent, second;
  Eigen::VectorXd gamma, gamma_prime, gamma_double_prime;
  double length = 0.0;
  double gamma_plus = 0.0;  // sup |gamma|
  double max_halfwidth = 0.0;

  int size() const { return static_cast<int>(s_grid.size()); }
  const ArcLengthMap& map() const { return *map_; }

  /// Exact geometry at an arbitrary arc length (reduced modulo L).
  ArcPoint evaluate(double s) const;

 private:
  friend GeometryProfile build_profile(const Curve&, int);
  std::shared_ptr<const ArcLengthMap> map_;
};

ArcPoint evaluate_arc_point(const ArcLengthMap& map, double s);

/// Builds the sampled profile; throws NotClosed, SelfIntersecting or TooFewSamples.
GeometryProfile build_profile(const Curve& curve, int n_samples);

/// Raw parameter t(s) on the uniform arc-length grid; throws DegenerateSpeed.
struct ArcLengthSamples {
  double length = 0.0;
  Eigen::VectorXd s, t;
};
ArcLengthSamples arc_length_reparametrize(const Curve& curve, int n_samples);

/// Curvilinear coordinates (s, u) -> (Gamma1 + u Gamma2', Gamma2 - u Gamma1').
/// The Jacobian of this map is 1 - u gamma with gamma as defined above; the
/// transformed forms use g = 1 + u gamma, i.e. the reflected normal, which
/// leaves the delta' spectrum unchanged.
Eigen::Vector2d tube_map(const GeometryProfile& profile, double s, double u);

double max_injectivity_halfwidth(const GeometryProfile& profile);

/// Checks used by the geometry report.
struct ProfileChecks {
  double unit_speed_error = 0.0;      // max | |Gamma'|^2 - 1 |
  double curvature_identity_error = 0.0;  // max | gamma^2 - |Gamma''|^2 |
  double turning_number_error = 0.0;  // | int gamma ds -+ 2pi |
  double total_curvature = 0.0;
};
ProfileChecks check_profile(const GeometryProfile& profile);

}  // namespace loopspec
