#include <doctest.h>

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <numbers>

#include "oracles/oracles.hpp"
#include "tacnode/error.hpp"
#include "tacnode/quadrature.hpp"
#include "tacnode/specfun.hpp"

using namespace tacnode;

TEST_CASE("harmonic oscillator values") {
  CHECK(harmonic_oscillator(0, 0.0) == doctest::Approx(std::pow(std::numbers::pi, -0.25)).epsilon(1e-15));
  CHECK(harmonic_oscillator(1, 0.0) == 0.0);
  CHECK_THROWS_AS(harmonic_oscillator(-1, 0.0), DomainError);
}

TEST_CASE("orthonormality from a Gauss-Hermite rule") {
  const QuadratureRule q = gauss_hermite_scaled(200);
  double worst = 0.0;
  for (int n = 0; n <= 60; ++n)
    for (int m = 0; m <= n; ++m) {
      double s = 0.0;
      for (std::size_t k = 0; k < q.size(); ++k) s += q.weights[k] * harmonic_oscillator(n, q.nodes[k]) * harmonic_oscillator(m, q.nodes[k]);
      worst = std::max(worst, std::fabs(s - (n == m)));
    }
  CHECK(worst < 1e-9);

  double s100 = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) s100 += q.weights[k] * std::pow(harmonic_oscillator(100, q.nodes[k]), 2);
  CHECK(std::fabs(s100 - 1.0) < 1e-10);
}

TEST_CASE("no overflow at large n and |x|") {
  const double v = harmonic_oscillator(1000000, 3.0);
  CHECK(std::isfinite(v));
  CHECK(std::fabs(v) < 1.0);
  CHECK(harmonic_oscillator(50, 1000.0) == 0.0);
  CHECK(harmonic_oscillator_scaled(50, 1000.0).log_abs() < -4e5);
}

TEST_CASE("Hermite polynomials against Rodrigues differentiation") {
  CHECK(hermite_poly(0, 1.7).to_double() == 1.0);
  CHECK(hermite_poly(2, 0.0).to_double() == -2.0);
  const auto c10 = oracle::hermite_rodrigues(10);
  CHECK(hermite_poly(10, 2.5).to_double() == doctest::Approx(static_cast<double>(oracle::poly_eval(c10, 2.5L))).epsilon(1e-13));

  double worst = 0.0;
  for (int n = 0; n <= 12; ++n) {
    const auto c = oracle::hermite_rodrigues(n);
    for (double x : {-2.2, -0.7, 0.3, 1.1, 3.4}) {
      const long double ref = std::pow(std::numbers::pi_v<long double>, -0.25L) / std::sqrt(std::pow(2.0L, n) * oracle::factorial(n)) *
                              std::exp(-0.5L * x * x) * oracle::poly_eval(c, x);
      if (std::fabs(ref) > 1e-12) worst = std::max(worst, static_cast<double>(std::fabs((harmonic_oscillator(n, x) - ref) / ref)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Airy function") {
  CHECK(airy_ai(0.0) == doctest::Approx(1.0 / (std::cbrt(9.0) * std::tgamma(2.0 / 3.0))).epsilon(1e-14));

  // first zero by bisection on the series oracle
  long double a = -2.4L, b = -2.3L;
  for (int i = 0; i < 200; ++i) {
    const long double m = 0.5L * (a + b);
    (oracle::airy_series(m) > 0 ? b : a) = m;
  }
  CHECK(std::fabs(airy_ai(static_cast<double>(a))) < 1e-10);
  CHECK(airy_ai(10.0) < 1e-9);
  CHECK(airy_ai(10.0) > 0.0);

  double series = 0.0;
  for (double x = -6.0; x <= 4.0; x += 0.25) {
    const long double ref = oracle::airy_series(x);
    if (std::fabs(ref) > 1e-3) series = std::max(series, static_cast<double>(std::fabs((airy_ai(x) - ref) / ref)));
  }
  CHECK(series < 1e-12);

  double boost_rel = 0.0;
  for (double x = -20.0; x <= 40.0; x += 0.173) {
    const double ref = boost::math::airy_ai(x);
    const double env = std::hypot(ref, boost::math::airy_ai_prime(x) / std::max(1.0, std::sqrt(std::fabs(x))));
    boost_rel = std::max(boost_rel, std::fabs(airy_ai(x) - ref) / (x > 0 ? std::fabs(ref) : env));
  }
  CHECK(boost_rel < 1e-12);

  double ode = 0.0;
  const double h = 1e-4;
  for (double x = -10.0; x <= 10.0; x += 0.1) {
    const double d2 = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
    ode = std::max(ode, std::fabs(d2 - x * airy_ai(x)));
  }
  // round-off bound 4 eps_Ai / h^2 with eps_Ai ~ 1e-15 absolute; even a
  // correctly rounded Ai leaves ~4e-8 at this step
  CHECK(ode < 5e-7);

  for (double x : {-3.0, 0.5, 12.0}) CHECK(airy_ai_prime(x) == doctest::Approx(boost::math::airy_ai_prime(x)).epsilon(1e-11));
  CHECK_FALSE(airy_ai_scaled(50.0).in_range);
  CHECK(airy_ai_scaled(30.0).in_range);
}

TEST_CASE("shifted Airy") {
  for (double x : {-2.0, 0.0, 1.5}) CHECK(airy_shifted(0.0, x) == doctest::Approx(airy_ai(x)).epsilon(1e-15));
  CHECK(airy_shifted(1.0, 0.0) == doctest::Approx(std::exp(2.0 / 3.0) * boost::math::airy_ai(1.0)).epsilon(1e-12));
  for (double s : {0.4, 1.3})
    for (double x : {-1.0, 0.7}) {
      const double ratio = airy_shifted(s, x) / airy_shifted(-s, x);
      CHECK(ratio == doctest::Approx(std::exp(4.0 * s * s * s / 3.0 + 2.0 * x * s)).epsilon(1e-12));
    }
  // large s with decaying Ai: the log-space combination stays finite
  CHECK(std::isfinite(airy_shifted(20.0, 5.0)));
  CHECK_THROWS_AS(airy_shifted(-20.0, -400.0), NumericalError);
}

TEST_CASE("heat kernels") {
  CHECK(heat_kernel(1.0, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK_THROWS_AS(heat_kernel(0.0, 1.0), DomainError);
  CHECK(oracle::integrate([](double x) { return heat_kernel(0.7, x); }, -15, 15) == doctest::Approx(1.0).epsilon(1e-12));

  const double s = 0.3, t = 0.8;
  for (double x : {-1.0, 0.4})
    for (double y : {0.0, 2.0}) {
      const double conv = oracle::integrate([&](double z) { return heat_kernel(s, x - z) * heat_kernel(t, z - y); }, -15, 15);
      CHECK(std::fabs(conv - heat_kernel(s + t, x - y)) < 1e-10);
    }
}

TEST_CASE("reflected heat kernel") {
  CHECK(reflected_kernel(0.2, 0.7, 0.0, -1.3) == 0.0);
  CHECK_THROWS_AS(reflected_kernel(0.5, 0.5, -1.0, -1.0), DomainError);
  for (double u : {-0.1, -1.0, -3.0}) {
    const double mass = oracle::integrate([&](double v) { return reflected_kernel(0.2, 0.6, u, v); }, -20, 0);
    CHECK(mass <= 1.0);
    CHECK(mass > 0.0);
  }
  const double a = 0.1, m = 0.35, b = 0.9;
  for (double u : {-0.2, -1.5})
    for (double v : {-0.5, -2.0}) {
      const double ck = oracle::integrate([&](double w) { return reflected_kernel(a, m, u, w) * reflected_kernel(m, b, w, v); }, -25, 0);
      CHECK(std::fabs(ck - reflected_kernel(a, b, u, v)) < 1e-10);
      CHECK(reflected_kernel(a, b, u, v) == doctest::Approx(reflected_kernel(a, b, v, u)).epsilon(1e-15));
      CHECK(reflected_kernel(a, b, -u, v) == doctest::Approx(-reflected_kernel(a, b, u, v)).epsilon(1e-15));
    }
}
