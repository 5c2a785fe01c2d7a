#include "tacnode/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tacnode/error.hpp"

namespace tacnode {

ScalingMap::ScalingMap(int n, double level) : N(n), r(level) {
  require(n >= 1, "ScalingMap: N must be >= 1");
  require(std::isfinite(level), "ScalingMap: r must be finite");
}

ScalingMap ScalingMap::tacnode(int n, double R) {
  ScalingMap m(n, std::sqrt(static_cast<double>(n)) + 0.5 * R * std::pow(n, -1.0 / 6.0));
  m.R = R;
  return m;
}

double ScalingMap::tau(double t) {
  require(t >= 0.0 && t < 1.0, "tau: t must lie in [0, 1)");
  return t / (4.0 * (1.0 - t));
}

double ScalingMap::t_of_tau(double tau) {
  require(tau >= 0.0, "t_of_tau: tau must be >= 0");
  return 4.0 * tau / (1.0 + 4.0 * tau);
}

double ScalingMap::u(double t, double x) const { return (x - r) / (std::numbers::sqrt2 * (1.0 - t)); }

double ScalingMap::x(double t, double uu) const { return r + std::numbers::sqrt2 * (1.0 - t) * uu; }

double ScalingMap::eta(double tau, double h) const { return (1.0 + 4.0 * tau) * (h - r) / std::numbers::sqrt2; }

double ScalingMap::t_of_T(double T) const { return 0.5 * (1.0 + T * std::pow(N, -1.0 / 3.0)); }

double ScalingMap::T_of_t(double t) const { return (2.0 * t - 1.0) * std::pow(N, 1.0 / 3.0); }

double ScalingMap::x_of_U(double U) const {
  return std::sqrt(static_cast<double>(N)) + 0.5 * (R_value() + U) * std::pow(N, -1.0 / 6.0);
}

double ScalingMap::U_of_x(double xx) const {
  return 2.0 * (xx - std::sqrt(static_cast<double>(N))) * std::pow(N, 1.0 / 6.0) - R_value();
}

double ScalingMap::R_value() const {
  if (R) return *R;
  return 2.0 * (r - std::sqrt(static_cast<double>(N))) * std::pow(N, 1.0 / 6.0);
}

ThresholdProfile ThresholdProfile::constant(double r) {
  ThresholdProfile p;
  p.r = r;
  return p;
}

ThresholdProfile ThresholdProfile::point_constraints(double r, std::vector<PointConstraint> pts) {
  ThresholdProfile p;
  p.r = r;
  p.kind = Kind::points;
  p.points = std::move(pts);
  p.validate();
  return p;
}

ThresholdProfile ThresholdProfile::piecewise(double r, std::vector<Segment> segs) {
  ThresholdProfile p;
  p.r = r;
  p.kind = Kind::segments;
  p.segments = std::move(segs);
  p.validate();
  return p;
}

void ThresholdProfile::validate() const {
  require(std::isfinite(r), "profile: r must be finite");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& c = points[i];
    require(c.t > 0.0 && c.t < 1.0, "profile: constraint time must lie in (0,1)");
    require(c.h <= r, "profile: constraint level h=" + std::to_string(c.h) + " exceeds r");
    if (i > 0) require(c.t > points[i - 1].t, "profile: constraint times must be strictly increasing");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    require(s.t_start > 0.0 && s.t_end < 1.0 && s.t_start < s.t_end,
            "profile: segment must satisfy 0 < t_start < t_end < 1");
    require(s.h <= r, "profile: segment level h=" + std::to_string(s.h) + " exceeds r");
    if (i > 0) require(s.t_start >= segments[i - 1].t_end, "profile: segments must be ordered and disjoint");
  }
}

ThresholdProfile ThresholdProfile::reversed() const {
  ThresholdProfile p = *this;
  std::reverse(p.points.begin(), p.points.end());
  for (auto& c : p.points) c.t = 1.0 - c.t;
  std::reverse(p.segments.begin(), p.segments.end());
  for (auto& s : p.segments) {
    const double a = 1.0 - s.t_end;
    s.t_end = 1.0 - s.t_start;
    s.t_start = a;
  }
  return p;
}

}  // namespace tacnode
