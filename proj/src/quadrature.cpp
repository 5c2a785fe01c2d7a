#include "tacnode/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "tacnode/error.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode {

namespace {

// Eigenvalues of the symmetric tridiagonal matrix with zero diagonal.
std::vector<double> jacobi_eigenvalues(const std::vector<double>& offdiag, int m) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(std::max(m - 1, 0));
  for (int i = 0; i + 1 < m; ++i) sub[i] = offdiag[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> x(es.eigenvalues().data(), es.eigenvalues().data() + m);
  std::sort(x.begin(), x.end());
  return x;
}

// P_m(x) and P_m'(x) by the three-term recurrence.
void legendre(int m, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  if (m == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= m; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = m * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

double QuadratureRule::weight_sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

bool QuadratureRule::same_as(const QuadratureRule& o) const {
  return nodes == o.nodes && weights == o.weights;
}

QuadratureRule QuadratureRule::joined(const QuadratureRule& right) const {
  if (empty()) return right;
  if (right.empty()) return *this;
  QuadratureRule q = *this;
  q.b = right.b;
  q.nodes.insert(q.nodes.end(), right.nodes.begin(), right.nodes.end());
  q.weights.insert(q.weights.end(), right.weights.begin(), right.weights.end());
  return q;
}

QuadratureRule gauss_legendre(double a, double b, int m) {
  require(a < b, "gauss_legendre: requires a < b");
  require(m >= 1, "gauss_legendre: requires m >= 1");
  std::vector<double> off(static_cast<std::size_t>(m));
  for (int k = 1; k < m; ++k) off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
  std::vector<double> x = m == 1 ? std::vector<double>{0.0} : jacobi_eigenvalues(off, m);
  QuadratureRule q;
  q.a = a;
  q.b = b;
  q.nodes.resize(static_cast<std::size_t>(m));
  q.weights.resize(static_cast<std::size_t>(m));
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < m; ++i) {
    // Symmetrise so that the rule is exactly symmetric about the midpoint.
    double xi = 0.5 * (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(m - 1 - i)]);
    double p = 0.0, dp = 0.0;
    for (int it = 0; it < 3 && m > 1; ++it) {
      legendre(m, xi, p, dp);
      if (dp == 0.0) break;
      xi -= p / dp;
    }
    legendre(m, xi, p, dp);
    const double w = m == 1 ? 2.0 : 2.0 / ((1.0 - xi * xi) * dp * dp);
    q.nodes[static_cast<std::size_t>(i)] = mid + half * xi;
    q.weights[static_cast<std::size_t>(i)] = half * w;
  }
  return q;
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int m) {
  require(breaks.size() >= 2, "composite_gauss_legendre: need at least one panel");
  QuadratureRule q;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] <= breaks[i]) continue;
    q = q.joined(gauss_legendre(breaks[i], breaks[i + 1], m));
  }
  q.a = breaks.front();
  q.b = breaks.back();
  return q;
}

QuadratureRule panel_rule(double a, double b, int m, double max_panel, const std::vector<double>& cuts) {
  require(a < b, "panel_rule: requires a < b");
  std::vector<double> pts{a, b};
  for (double c : cuts)
    if (c > a && c < b) pts.push_back(c);
  std::sort(pts.begin(), pts.end());
  std::vector<double> breaks;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = pts[i + 1] - pts[i];
    if (len <= 1e-14 * std::max(1.0, std::fabs(pts[i]))) continue;
    const int k = std::max(1, static_cast<int>(std::ceil(len / max_panel)));
    for (int j = 0; j < k; ++j) breaks.push_back(pts[i] + len * j / k);
  }
  breaks.push_back(b);
  return composite_gauss_legendre(breaks, m);
}

QuadratureRule gauss_hermite_scaled(int m) {
  require(m >= 1, "gauss_hermite_scaled: requires m >= 1");
  std::vector<double> off(static_cast<std::size_t>(m));
  for (int k = 1; k < m; ++k) off[static_cast<std::size_t>(k - 1)] = std::sqrt(k / 2.0);
  std::vector<double> x = m == 1 ? std::vector<double>{0.0} : jacobi_eigenvalues(off, m);
  QuadratureRule q;
  q.nodes.resize(static_cast<std::size_t>(m));
  q.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double z = 0.5 * (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(m - 1 - i)]);
    // Newton on phi_m: phi_m' = sqrt(2m) phi_{m-1} - z phi_m.
    for (int it = 0; it < 3 && m > 1; ++it) {
      const auto phi = harmonic_oscillator_all(m + 1, z);
      const ScaledReal pm = phi[static_cast<std::size_t>(m)];
      const ScaledReal d = ScaledReal(std::sqrt(2.0 * m)) * phi[static_cast<std::size_t>(m - 1)] - ScaledReal(z) * pm;
      if (d.is_zero()) break;
      z -= (pm / d).to_double();
    }
    const auto phi = harmonic_oscillator_all(m, z);
    ScaledReal s;
    for (const auto& p : phi) s += p * p;
    q.nodes[static_cast<std::size_t>(i)] = z;
    q.weights[static_cast<std::size_t>(i)] = (ScaledReal(1.0) / s).to_double();
  }
  q.a = q.nodes.front();
  q.b = q.nodes.back();
  return q;
}

}  // namespace tacnode
