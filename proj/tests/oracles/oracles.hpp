#pragma once

// Reference implementations that share no code with the library: long
// double Maclaurin series, symbolic Rodrigues differentiation, direct
// contour quadrature and closed-form Brownian bridge laws.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

// Ai(x) from its Maclaurin series in long double; good for |x| <= 6.
inline long double airy_series(long double x) {
  const long double c1 = 0.355028053887817239260L, c2 = 0.258819403792806798405L;
  long double f = 1, g = x, sf = 1, sg = x;
  for (int k = 1; k < 200; ++k) {
    f *= x * x * x / ((3.0L * k - 1) * (3.0L * k));
    g *= x * x * x / ((3.0L * k) * (3.0L * k + 1));
    sf += f;
    sg += g;
    if (std::fabs(f) + std::fabs(g) < 1e-30L) break;
  }
  return c1 * sf - c2 * sg;
}

// Coefficients of H_n from (-1)^n e^{x^2} d^n/dx^n e^{-x^2}: with
// d/dx (p e^{-x^2}) = (p' - 2 x p) e^{-x^2}.
inline std::vector<long double> hermite_rodrigues(int n) {
  std::vector<long double> p{1.0L};
  for (int k = 0; k < n; ++k) {
    std::vector<long double> q(p.size() + 1, 0.0L);
    for (std::size_t i = 1; i < p.size(); ++i) q[i - 1] += i * p[i];
    for (std::size_t i = 0; i < p.size(); ++i) q[i + 1] -= 2.0L * p[i];
    p = q;
  }
  if (n % 2) for (auto& c : p) c = -c;
  return p;
}

inline long double poly_eval(const std::vector<long double>& c, long double x) {
  long double s = 0;
  for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
  return s;
}

inline long double factorial(int n) {
  long double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Gauss-Legendre on [a, b] by plain Newton on P_m (independent of the
// library's Golub-Welsch construction).
inline void gl(int m, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0);
  w.assign(m, 0);
  for (int i = 0; i < m; ++i) {
    long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (m + 0.5L)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (m == 1) p0 = 1;
      dp = m * (z * p1 - p0) / (z * z - 1);
      const long double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-19L) break;
    }
    x[i] = static_cast<double>(0.5L * (a + b) + 0.5L * (b - a) * z);
    w[i] = static_cast<double>((b - a) / ((1 - z * z) * dp * dp));
  }
}

// Integral of f on [a, b] with `panels` panels of m-point Gauss-Legendre.
template <class F>
double integrate(F&& f, double a, double b, int panels = 40, int m = 20) {
  std::vector<double> x, w;
  long double s = 0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    gl(m, a + p * h, a + (p + 1) * h, x, w);
    for (int i = 0; i < m; ++i) s += w[i] * f(x[i]);
  }
  return static_cast<double>(s);
}

// Phi_tau^n(u) by quadrature of the defining integral along W = iy.
inline double phi_contour(int n, double r, double tau, double u) {
  using C = std::complex<double>;
  const double Y = std::sqrt(45.0 / (4.0 * tau)) + 2.0;
  const double s2r = std::sqrt(2.0) * r;
  auto f = [&](double y) {
    const C W(0.0, y);
    const C a = s2r - 2.0 * W;
    const C e = std::pow(W, n) * std::exp(tau * a * a - s2r * W) * (std::exp(a * u) - std::exp(-a * u));
    return e.real();  // (1/(pi i)) * i dy
  };
  return integrate(f, -Y, Y, 200, 20) / std::numbers::pi;
}

// Contour integral (1/2 pi i) oint_{|Z| = rho} F(Z) dZ by the trapezoidal rule.
template <class F>
double circle(F&& fn, double rho, int M = 256) {
  std::complex<double> s = 0;
  for (int k = 0; k < M; ++k) {
    const std::complex<double> Z = std::polar(rho, 2.0 * std::numbers::pi * k / M);
    s += fn(Z) * Z;  // dZ = i Z dtheta
  }
  return (s / static_cast<double>(M)).real();
}

inline double psi_contour(int m, double r, double tau, double v) {
  using C = std::complex<double>;
  const double s2r = std::sqrt(2.0) * r;
  return circle([&](C Z) {
    const C a = s2r - 2.0 * Z;
    return std::pow(Z, -(m + 1)) * std::exp(-tau * a * a + s2r * Z) * (std::exp(-a * v) - std::exp(a * v));
  }, 1.0);
}

inline double k0_contour(int n, int m, double r) {
  using C = std::complex<double>;
  const double s2r = std::sqrt(2.0) * r;
  return circle([&](C Z) { return std::pow(s2r - Z, n) * std::pow(Z, -(m + 1)) * std::exp(-2.0 * r * r + 2.0 * s2r * Z); }, 1.0);
}

// One Brownian bridge from 0 to 0 on [0, 1]: P(B < r on [0,1]).
inline double bridge_below(double r) { return r <= 0 ? 0.0 : -std::expm1(-2.0 * r * r); }

// Brownian bridge from a to b over time d staying below level c.
inline double bridge_segment_below(double a, double b, double c, double d) {
  if (a >= c || b >= c) return 0.0;
  return -std::expm1(-2.0 * (c - a) * (c - b) / d);
}

inline double gauss(double x, double var) { return std::exp(-x * x / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); }

// N = 1: P(B(t) < h | B < r on [0, 1]).
inline double bridge_point(double r, double t, double h) {
  const double lo = -12.0 * std::sqrt(t * (1 - t));
  const double num = integrate([&](double x) {
    return gauss(x, t * (1 - t)) * bridge_segment_below(0, x, r, t) * bridge_segment_below(x, 0, r, 1 - t);
  }, lo, std::min(h, r));
  return num / bridge_below(r);
}

// N = 1: P(B < h on [t1, t2] | B < r on [0, 1]), h <= r.
inline double bridge_segment(double r, double t1, double t2, double h) {
  const double s1 = std::sqrt(t1 * (1 - t1)), lo = -12.0;
  auto joint = [&](double x, double y) {
    // bridge density at (t1, t2)
    return gauss(x, t1) * gauss(y - x, t2 - t1) * gauss(y, 1 - t2) / gauss(0, 1.0);
  };
  const double num = integrate([&](double x) {
    return integrate([&](double y) {
      return joint(x, y) * bridge_segment_below(0, x, r, t1) * bridge_segment_below(x, y, h, t2 - t1) *
             bridge_segment_below(y, 0, r, 1 - t2);
    }, lo, h, 30, 20);
  }, lo * s1 * 2, h, 30, 20);
  return num / bridge_below(r);
}

}  // namespace oracle
