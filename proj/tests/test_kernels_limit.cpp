#include <doctest.h>

#include <boost/math/special_functions/airy.hpp>
#include <cmath>

#include "tacnode/error.hpp"
#include "tacnode/kernels_limit.hpp"
#include "tacnode/tracy_widom.hpp"
#include "tacnode/verify.hpp"

using namespace tacnode;

namespace {

double airy_kernel(double x, double y) {
  using boost::math::airy_ai;
  using boost::math::airy_ai_prime;
  if (std::fabs(x - y) < 1e-9) return airy_ai_prime(x) * airy_ai_prime(x) - x * airy_ai(x) * airy_ai(x);
  return (airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)) / (x - y);
}

}  // namespace

TEST_CASE("building blocks") {
  CHECK(phi_hat(1.0, 0.3, 0.5, 0.0) == 0.0);
  CHECK(psi_hat(1.0, 0.3, 0.5, 0.0) == 0.0);
  CHECK(k0_hat(0.5, 0.2, 0.3) == doctest::Approx(std::pow(2.0, -1.0 / 3.0) * boost::math::airy_ai(std::pow(2.0, -1.0 / 3.0) * 1.5)).epsilon(1e-12));
}

TEST_CASE("GOE identity") {
  for (double R : {-1.0, 0.0, 1.0, 2.0}) CHECK(std::fabs(LimitKernel({R}).det_k0() - tracy_widom_goe(std::cbrt(4.0) * R)) < 1e-8);
}

TEST_CASE("boundary vanishing and validation") {
  const LimitKernel k({1.0});
  CHECK(k.extended(0.0, 0.0, 0.0, -1.0) == 0.0);
  CHECK(k.extended(0.2, -0.5, 0.7, 0.0) == 0.0);
  CHECK_THROWS_AS(k.extended(0.0, 0.5, 0.0, -1.0), DomainError);
  CHECK_THROWS_AS(LimitKernel({std::nan("")}), DomainError);
  LimitSlices empty{{{0.0, 0.0}}};
  CHECK(limit_gap_probability(k, empty).value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(functional_limit_det(k, -0.5, 0.5, {{-0.5, 0.5, 1.5}}), DomainError);
  CHECK_THROWS_AS(functional_limit_det(k, 0.5, -0.5, {{-0.5, 0.5, 0.5}}), DomainError);
}

TEST_CASE("rank-one derivative") {
  for (double R : {0.0, 1.0}) CHECK(rank_one_defect(R) < 1e-5);
}

TEST_CASE("extended Airy kernel") {
  for (double x : {-2.0, 0.0, 1.5})
    for (double y : {-1.0, 0.5}) CHECK(std::fabs(extended_airy_kernel(0.3, x - 0.09, 0.3, y - 0.09) - airy_kernel(x, y)) < 1e-10);
  CHECK(airy_limit_gap(8.0) < 1e-4);
  CHECK(airy_limit_gap(8.0) < airy_limit_gap(4.0));
}

TEST_CASE("large R recovers the Airy2 stay-below probability") {
  const LimitKernel k({8.0});
  const double a = functional_limit_det(k, -0.5, 0.5, {{-0.5, 0.5, 0.5}}).value;
  const double b = airy2_stay_below(-0.5, 0.5, {{-0.5, 0.5, 0.5}}).value;
  CHECK(std::fabs(a - b) < 1e-6);
}

TEST_CASE("functional determinant is monotone in H and below the single-time gap") {
  const LimitKernel k({1.0});
  const double lo = functional_limit_det(k, -0.5, 0.5, {{-0.5, 0.5, 0.0}}).value;
  const double hi = functional_limit_det(k, -0.5, 0.5, {{-0.5, 0.5, 0.5}}).value;
  CHECK(lo < hi);
  const double one = limit_gap_probability(k, {{{0.0, -1.0}}}).value;
  CHECK(lo < one);
}
