#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "tacnode/error.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/kernels_finite.hpp"
#include "tacnode/specfun.hpp"

using namespace tacnode;

TEST_CASE("Phi and Psi vanish at u = 0") {
  const ScalingMap m(4, 2.0);
  for (int n = 0; n < 4; ++n) {
    CHECK(phi_fn(m, 0.3, n, 0.0) == 0.0);
    CHECK(psi_fn(m, 0.3, n, 0.0) == 0.0);
  }
  CHECK_THROWS_AS(phi_fn(m, 0.3, 4, -1.0), DomainError);
  CHECK_THROWS_AS(psi_fn(m, -0.3, 0, -1.0), DomainError);
}

TEST_CASE("Phi against quadrature of its contour integral") {
  for (double r : {0.8, 1.5})
    for (double tau : {0.1, 0.4})
      for (int n : {0, 1, 3}) {
        const ScalingMap m(4, r);
        for (double u : {-0.3, -1.2, -2.5}) {
          const double ref = oracle::phi_contour(n, r, tau, u);
          CHECK(phi_fn(m, tau, n, u) == doctest::Approx(ref).epsilon(1e-8));
        }
      }
}

TEST_CASE("Psi against the residue at Z = 0") {
  const double r = 1.3, tau = 0.35;
  const ScalingMap m(6, r);
  for (double v : {-0.2, -1.0, -2.7}) {
    const double closed = std::exp(-2 * tau * r * r) * (std::exp(-std::sqrt(2.0) * r * v) - std::exp(std::sqrt(2.0) * r * v));
    CHECK(psi_fn(m, tau, 0, v) == doctest::Approx(closed).epsilon(1e-13));
    for (int k = 1; k < 6; ++k) CHECK(psi_fn(m, tau, k, v) == doctest::Approx(oracle::psi_contour(k, r, tau, v)).epsilon(1e-10));
  }
}

TEST_CASE("Gaussian decay of Phi") {
  const ScalingMap m(10, 2.0);
  const double tau = 0.25;
  for (int n = 0; n < 10; ++n) {
    double ratio_max = 0.0;
    for (double u = -4.0; u >= -30.0; u -= 2.0) ratio_max = std::max(ratio_max, std::fabs(phi_fn(m, tau, n, u)) * std::exp(u * u / (8.0 * tau)));
    const double c = std::fabs(phi_fn(m, tau, n, -4.0)) * std::exp(16.0 / (8.0 * tau));
    // polynomial growth at most against the Gaussian
    CHECK(ratio_max <= c * std::pow(30.0 / 4.0, n + 2));
  }
}

TEST_CASE("K0 against contour quadrature") {
  for (double r : {0.7, 1.5, 2.2}) {
    const ScalingMap m(5, r);
    const K0Matrix k(m);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(std::fabs(k.entry(i, j) - oracle::k0_contour(i, j, r)) < 1e-11);
    CHECK(k.det() > 0.0);
    CHECK(k.det() < 1.0);
  }
  const K0Matrix far(ScalingMap(3, 12.0));
  CHECK(far.det() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(K0Matrix(ScalingMap(1001, 40.0)), DomainError);
}

TEST_CASE("K0 residue and Gauss-Hermite routes") {
  double worst = 0.0;
  for (int N : {1, 3, 8, 20})
    for (double r : {0.5, 2.0, 4.0, 6.0}) {
      const ScalingMap m(N, r);
      const auto a = K0Matrix::residue_scaled(m);
      const auto b = K0Matrix::gauss_hermite_scaled(m);
      for (int n = 0; n < N; ++n) {
        const double scale = ((Eigen::MatrixXd::Identity(N, N) - b).row(n)).cwiseAbs().maxCoeff();
        worst = std::max(worst, (a.row(n) - b.row(n)).cwiseAbs().maxCoeff() / scale);
      }
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("compatibility relations") {
  const double taus[] = {0.125, 0.25, 0.5, 1.0};
  for (int N : {1, 4, 8})
    for (int i = 0; i < 3; ++i) CHECK(compatibility_check(ScalingMap(N, 1.7), taus[i], taus[i + 1]).worst() < 1e-8);
}

TEST_CASE("conjugated forms agree") {
  for (int N : {2, 7})
    for (int n = 0; n < N; ++n) CHECK(conjugation_check(ScalingMap(N, 2.0), 0.3, n, -1.1) < 1e-10);
}

TEST_CASE("extended kernel structure") {
  const FiniteKernel k(ScalingMap(3, 2.0));
  CHECK(k.extended(0.2, 0.0, 0.4, -1.0) == 0.0);
  CHECK(k.extended(0.2, -1.0, 0.4, 0.0) == 0.0);
  // the heat-kernel part switches on only for tau1 < tau2
  const double below = k.extended(0.2, -0.7, 0.4, -0.9), above = k.extended(0.4, -0.9, 0.2, -0.7);
  CHECK(below - k.main_part(0.2, -0.7, 0.4, -0.9) == doctest::Approx(-reflected_kernel(0.2, 0.4, -0.7, -0.9)).epsilon(1e-12));
  CHECK(above == doctest::Approx(k.main_part(0.4, -0.9, 0.2, -0.7)).epsilon(1e-14));

  // one bridge: the equal-time kernel is the conditioned density of B(t)
  const ScalingMap m1(1, 1.0);
  const FiniteKernel k1(m1);
  const double t = 0.4, x = -0.3;
  const double dens = oracle::gauss(x, t * (1 - t)) * oracle::bridge_segment_below(0, x, 1.0, t) *
                      oracle::bridge_segment_below(x, 0, 1.0, 1 - t) / oracle::bridge_below(1.0);
  CHECK(k1.original(t, x, t, x) == doctest::Approx(dens).epsilon(1e-10));
}
