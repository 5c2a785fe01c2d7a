#include "tacnode/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tacnode/error.hpp"

namespace tacnode {

namespace {

constexpr double kPiQuarterInv = 0.75112554446494248285870300477622;  // pi^{-1/4}
constexpr double kAi0 = 0.35502805388781723926;
constexpr double kAip0 = -0.25881940379280679840;
constexpr int kRenormBits = 400;
const double kRenormHi = std::ldexp(1.0, kRenormBits);
const double kRenormLo = std::ldexp(1.0, -kRenormBits);

struct AiryPair {
  double y;
  double yp;
};

// One Taylor step of y'' = x y from x0 to x0 + h.
AiryPair taylor_step(double x0, AiryPair start, double h) {
  // c_k = (x0 c_{k-2} + c_{k-3}) / (k (k-1)), c_{-1} = 0
  double cm3 = 0.0;
  double cm2 = start.y;
  double cm1 = start.yp;
  double hp = h;  // h^{k-1}
  double y = start.y + start.yp * h;
  double yp = start.yp;
  int quiet = 0;
  for (int k = 2; k < 120; ++k) {
    const double ck = (x0 * cm2 + cm3) / (static_cast<double>(k) * (k - 1));
    const double ty = ck * hp * h;
    const double typ = k * ck * hp;
    y += ty;
    yp += typ;
    hp *= h;
    cm3 = cm2;
    cm2 = cm1;
    cm1 = ck;
    if (std::fabs(ty) <= 1e-18 * std::fabs(y) && std::fabs(typ) <= 1e-18 * std::fabs(yp)) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return {y, yp};
}

// Series coefficients u_k of the Airy asymptotic expansions.
double airy_u_next(double u_prev, int k) {
  return u_prev * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
         (216.0 * k * (2.0 * k - 1.0));
}

// Scaled Ai, Ai' for x >= kAiryAsymptotic: Ai = e^{-zeta} * ai.
AiryValue airy_asymptotic_pos(double x) {
  const double z = x * std::sqrt(x);
  const double zeta = 2.0 * z / 3.0;
  const double x14 = std::sqrt(std::sqrt(x));
  double s = 1.0;
  double t = 1.0;
  double u = 1.0;
  double zp = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    u = airy_u_next(u, k);
    zp /= -zeta;
    const double term = u * zp;
    if (std::fabs(term) >= prev || std::fabs(term) < 1e-18) break;
    const double v = -u * (6.0 * k + 1.0) / (6.0 * k - 1.0);
    s += term;
    t += v * zp;
    prev = std::fabs(term);
  }
  const double c = 0.5 / std::sqrt(std::numbers::pi);
  AiryValue out;
  out.ai = c * s / x14;
  out.ai_prime = -c * x14 * t;
  out.log_scale = -zeta;
  return out;
}

AiryPair airy_asymptotic_neg(double x) {
  const double z = -x;
  const double zeta = 2.0 * z * std::sqrt(z) / 3.0;
  const double z14 = std::sqrt(std::sqrt(z));
  // Even / odd index partial sums of (-1)^k u_k zeta^{-k}, split as in the
  // oscillatory form.
  double se = 1.0, so = 0.0, te = 1.0, to = 0.0;
  double u = 1.0;
  double zp = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    u = airy_u_next(u, k);
    zp /= zeta;
    const double mag = u * zp;
    if (mag >= prev || mag < 1e-18) break;
    const double v = -u * (6.0 * k + 1.0) / (6.0 * k - 1.0);
    // index k = 2j or 2j+1 carries sign (-1)^j
    const int j = k / 2;
    const double sg = (j % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      se += sg * mag;
      te += sg * v * zp;
    } else {
      so += sg * mag;
      to += sg * v * zp;
    }
    prev = mag;
  }
  const double theta = zeta - 0.25 * std::numbers::pi;
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const double rp = 1.0 / std::sqrt(std::numbers::pi);
  return {rp / z14 * (c * se + sn * so), rp * z14 * (sn * te - c * to)};
}

AiryPair step_to(double from, AiryPair start, double to) {
  const double span = to - from;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(span) / 0.75)));
  const double h = span / steps;
  AiryPair cur = start;
  double x = from;
  for (int i = 0; i < steps; ++i) {
    cur = taylor_step(x, cur, h);
    x = from + (i + 1) * h;
  }
  return cur;
}

}  // namespace

std::vector<ScaledReal> harmonic_oscillator_all(int count, double x) {
  std::vector<ScaledReal> out;
  if (count <= 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  const ScaledReal g = ScaledReal::exp(-0.5 * x * x);
  std::int64_t e = g.exponent();
  double prev = 0.0;
  double cur = kPiQuarterInv * g.mantissa();
  for (int k = 0; k < count; ++k) {
    out.push_back(ScaledReal::from_parts(cur, e));
    if (k + 1 == count) break;
    const double next = x * std::sqrt(2.0 / (k + 1.0)) * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
    const double m = std::max(std::fabs(cur), std::fabs(prev));
    if (m > kRenormHi) {
      cur *= kRenormLo;
      prev *= kRenormLo;
      e += kRenormBits;
    } else if (m < kRenormLo && m > 0.0) {
      cur *= kRenormHi;
      prev *= kRenormHi;
      e -= kRenormBits;
    }
  }
  return out;
}

ScaledReal harmonic_oscillator_scaled(int n, double x) {
  require(n >= 0, "harmonic_oscillator: n must be >= 0");
  return harmonic_oscillator_all(n + 1, x).back();
}

double harmonic_oscillator(int n, double x) { return harmonic_oscillator_scaled(n, x).to_double(); }

ScaledReal hermite_poly(int n, double x) {
  require(n >= 0, "hermite_poly: n must be >= 0");
  if (n == 0) return ScaledReal(1.0);
  double prev = 1.0;
  double cur = 2.0 * x;
  std::int64_t e = 0;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
    const double m = std::max(std::fabs(cur), std::fabs(prev));
    if (m > kRenormHi) {
      cur *= kRenormLo;
      prev *= kRenormLo;
      e += kRenormBits;
    }
  }
  return ScaledReal::from_parts(cur, e);
}

AiryValue airy_ai_scaled(double x) {
  AiryValue out;
  out.in_range = x >= -20.0 && x <= 40.0;
  if (std::isnan(x)) {
    out.ai = out.ai_prime = x;
    return out;
  }
  if (x >= kAiryAsymptotic) {
    AiryValue a = airy_asymptotic_pos(x);
    a.in_range = out.in_range;
    return a;
  }
  AiryPair p{};
  if (x <= -kAiryAsymptotic) {
    p = airy_asymptotic_neg(x);
  } else if (x <= 1.0) {
    p = step_to(0.0, {kAi0, kAip0}, x);
  } else {
    // Decaying solution: carry it backwards from the asymptotic anchor, where
    // the growing solution Bi is the one that shrinks.
    const AiryValue anchor = airy_asymptotic_pos(kAiryAsymptotic);
    const double s = std::exp(anchor.log_scale);
    p = step_to(kAiryAsymptotic, {anchor.ai * s, anchor.ai_prime * s}, x);
  }
  out.ai = p.y;
  out.ai_prime = p.yp;
  out.log_scale = 0.0;
  return out;
}

double airy_ai(double x) {
  const AiryValue a = airy_ai_scaled(x);
  return a.log_scale == 0.0 ? a.ai : a.ai * std::exp(a.log_scale);
}

double airy_ai_prime(double x) {
  const AiryValue a = airy_ai_scaled(x);
  return a.log_scale == 0.0 ? a.ai_prime : a.ai_prime * std::exp(a.log_scale);
}

ScaledReal airy_shifted_scaled(double s, double x) {
  const AiryValue a = airy_ai_scaled(s * s + x);
  const double logpref = 2.0 * s * s * s / 3.0 + x * s + a.log_scale;
  return ScaledReal(a.ai) * ScaledReal::exp(logpref);
}

double airy_shifted(double s, double x) {
  const ScaledReal v = airy_shifted_scaled(s, x);
  if (!v.is_zero() && v.exponent() >= 1023)
    throw NumericalError("airy_shifted: result overflows double range");
  return v.to_double();
}

double heat_kernel(double t, double x) {
  require(t > 0.0, "heat_kernel: t must be positive");
  return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

double reflected_kernel(double tau1, double tau2, double u, double v) {
  require(tau2 > tau1, "reflected_kernel: requires tau2 > tau1");
  const double var = 2.0 * (tau2 - tau1);
  return heat_kernel(var, v - u) - heat_kernel(var, v + u);
}

}  // namespace tacnode
