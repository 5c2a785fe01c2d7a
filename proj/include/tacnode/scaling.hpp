#pragma once

#include <optional>
#include <vector>

namespace tacnode {

// Coordinates used throughout:
//   original (t, x), bridge (tau, u) with tau = t / (4(1-t)), u = (x-r)/(sqrt2 (1-t)),
//   tacnode (T, U) with t = (1 + T N^{-1/3})/2, x = sqrt(N) + (R + U) N^{-1/6}/2.
struct ScalingMap {
  int N = 1;
  double r = 0.0;
  std::optional<double> R;  // set when r = sqrt(N) + R N^{-1/6} / 2

  ScalingMap() = default;
  ScalingMap(int n, double level);
  static ScalingMap tacnode(int n, double R);

  static double tau(double t);
  static double t_of_tau(double tau);
  double u(double t, double x) const;
  double x(double t, double u) const;

  // Barrier level h at bridge time tau, in u units: (1 + 4 tau)(h - r)/sqrt2.
  double eta(double tau, double h) const;

  double t_of_T(double T) const;
  double T_of_t(double t) const;
  double x_of_U(double U) const;
  double U_of_x(double x) const;
  double R_value() const;  // R, derived from r when not given
};

// One constant piece of a barrier: h on (t_start, t_end).
struct Segment {
  double t_start;
  double t_end;
  double h;
};

struct PointConstraint {
  double t;
  double h;
};

// A barrier h(t) <= r on [0, 1], equal to r except on finitely many points or
// finitely many constant segments.
struct ThresholdProfile {
  enum class Kind { constant, points, segments };

  double r = 0.0;
  Kind kind = Kind::constant;
  std::vector<PointConstraint> points;
  std::vector<Segment> segments;

  static ThresholdProfile constant(double r);
  static ThresholdProfile point_constraints(double r, std::vector<PointConstraint> pts);
  static ThresholdProfile piecewise(double r, std::vector<Segment> segs);

  // Throws DomainError when an invariant is violated.
  void validate() const;

  // Same constraints at t -> 1 - t.
  ThresholdProfile reversed() const;
};

}  // namespace tacnode
