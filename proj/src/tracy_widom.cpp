#include "tacnode/tracy_widom.hpp"

#include <array>
#include <boost/math/special_functions/airy.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "tacnode/error.hpp"

namespace tacnode {

namespace {

constexpr double kStart = 12.0;

// y = (q, q', u, w, v) with u = int_s^inf q^2, w = int_s^inf (x - s) q^2,
// v = int_s^inf q. Tails beyond kStart are below 1e-18.
using State = std::array<double, 5>;

State integrate_to(double s) {
  require(std::isfinite(s), "Tracy-Widom: s must be finite");
  require(s > -12.0, "Tracy-Widom: s below the supported range (-12)");
  State y{boost::math::airy_ai(kStart), boost::math::airy_ai_prime(kStart), 0.0, 0.0, 0.0};
  if (s >= kStart) return y;
  auto rhs = [](const State& x, State& dx, double t) {
    dx[0] = x[1];
    dx[1] = t * x[0] + 2.0 * x[0] * x[0] * x[0];
    dx[2] = -x[0] * x[0];
    dx[3] = -x[2];
    dx[4] = -x[0];
  };
  using namespace boost::numeric::odeint;
  auto stepper = make_controlled(1e-30, 1e-14, runge_kutta_fehlberg78<State>());
  integrate_adaptive(stepper, rhs, y, kStart, s, -0.01);
  return y;
}

}  // namespace

double tracy_widom_gue(double s) {
  if (s >= kStart) return 1.0;
  return std::exp(-integrate_to(s)[3]);
}

double tracy_widom_goe(double s) {
  if (s >= kStart) return 1.0;
  const State y = integrate_to(s);
  return std::exp(-0.5 * y[4] - 0.5 * y[3]);
}

}  // namespace tacnode
