#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace tacnode {

// A real number stored as mantissa * 2^exponent with |mantissa| in [1,2) or
// mantissa == 0. Carries the Hermite-type quantities whose magnitudes leave
// the double range (factors like e^{2 tau r^2} at r ~ sqrt(N)).
class ScaledReal {
 public:
  constexpr ScaledReal() = default;

  // NOLINTNEXTLINE(google-explicit-constructor)
  ScaledReal(double x) { assign(x, 0); }

  static ScaledReal from_parts(double mantissa, std::int64_t exponent) {
    ScaledReal s;
    s.assign(mantissa, exponent);
    return s;
  }

  // sign * e^{log_abs}; log_abs may be far outside the double exponent range.
  static ScaledReal from_log(double log_abs, int sign = 1) {
    if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity()) return {};
    const double l2 = log_abs / numbers_ln2();
    const double e = std::floor(l2);
    ScaledReal s;
    s.assign(sign * std::exp2(l2 - e), static_cast<std::int64_t>(e));
    return s;
  }

  static ScaledReal exp(double x) { return from_log(x, 1); }

  double mantissa() const { return mant_; }
  std::int64_t exponent() const { return exp_; }
  bool is_zero() const { return mant_ == 0.0; }
  int sign() const { return (mant_ > 0) - (mant_ < 0); }

  // ln|value|; -inf for zero.
  double log_abs() const {
    if (is_zero()) return -std::numeric_limits<double>::infinity();
    return std::log(std::fabs(mant_)) + static_cast<double>(exp_) * numbers_ln2();
  }

  // Native double; saturates to +-inf / 0 outside the representable range.
  double to_double() const {
    if (is_zero()) return 0.0;
    if (exp_ > 1100) return mant_ > 0 ? HUGE_VAL : -HUGE_VAL;
    if (exp_ < -1200) return 0.0;
    return std::ldexp(mant_, static_cast<int>(exp_));
  }

  // True when to_double() is exact-range (no overflow, no flush to zero).
  bool fits_double() const { return is_zero() || (exp_ < 1023 && exp_ > -1022); }

  ScaledReal operator-() const {
    ScaledReal s = *this;
    s.mant_ = -s.mant_;
    return s;
  }

  friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
    if (a.is_zero() || b.is_zero()) return {};
    return from_parts(a.mant_ * b.mant_, a.exp_ + b.exp_);
  }

  friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
    if (a.is_zero()) return {};
    return from_parts(a.mant_ / b.mant_, a.exp_ - b.exp_);
  }

  friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const std::int64_t d = a.exp_ - b.exp_;
    if (d > 60) return a;
    if (d < -60) return b;
    if (d >= 0) return from_parts(a.mant_ + std::ldexp(b.mant_, static_cast<int>(-d)), a.exp_);
    return from_parts(std::ldexp(a.mant_, static_cast<int>(d)) + b.mant_, b.exp_);
  }

  friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) { return a + (-b); }

  ScaledReal& operator*=(const ScaledReal& o) { return *this = *this * o; }
  ScaledReal& operator/=(const ScaledReal& o) { return *this = *this / o; }
  ScaledReal& operator+=(const ScaledReal& o) { return *this = *this + o; }
  ScaledReal& operator-=(const ScaledReal& o) { return *this = *this - o; }

  // value * 2^k, exact.
  ScaledReal ldexp(std::int64_t k) const {
    ScaledReal s = *this;
    if (!s.is_zero()) s.exp_ += k;
    return s;
  }

  ScaledReal abs() const {
    ScaledReal s = *this;
    s.mant_ = std::fabs(s.mant_);
    return s;
  }

 private:
  static constexpr double numbers_ln2() { return 0.693147180559945309417232121458176568; }

  void assign(double m, std::int64_t e) {
    if (m == 0.0 || !std::isfinite(m)) {
      mant_ = std::isfinite(m) ? 0.0 : m;
      exp_ = 0;
      return;
    }
    int k = 0;
    const double f = std::frexp(m, &k);  // |f| in [0.5, 1)
    mant_ = 2.0 * f;
    exp_ = e + k - 1;
  }

  double mant_ = 0.0;
  std::int64_t exp_ = 0;
};

inline bool abs_less(const ScaledReal& a, const ScaledReal& b) {
  if (a.is_zero()) return !b.is_zero();
  if (b.is_zero()) return false;
  if (a.exponent() != b.exponent()) return a.exponent() < b.exponent();
  return std::fabs(a.mantissa()) < std::fabs(b.mantissa());
}

// Neumaier-compensated accumulation of ScaledReal terms. The running sum is
// kept as (hi, lo) doubles relative to a shared exponent which is re-based
// whenever a term dominates it.
class CompensatedSum {
 public:
  void add(const ScaledReal& t) {
    if (t.is_zero()) return;
    abs_sum_ += t.abs();
    if (sum_hi_ == 0.0 && sum_lo_ == 0.0) base_ = t.exponent();
    if (t.exponent() > base_ + 400) rebase(t.exponent());
    const double x = std::ldexp(t.mantissa(), static_cast<int>(std::max<std::int64_t>(t.exponent() - base_, -1100)));
    const double s = sum_hi_ + x;
    if (std::fabs(sum_hi_) >= std::fabs(x))
      sum_lo_ += (sum_hi_ - s) + x;
    else
      sum_lo_ += (x - s) + sum_hi_;
    sum_hi_ = s;
  }

  ScaledReal value() const { return ScaledReal::from_parts(sum_hi_ + sum_lo_, base_); }

  // Sum of |terms|; value().abs() / abs_total() measures cancellation.
  ScaledReal abs_total() const { return abs_sum_; }

 private:
  void rebase(std::int64_t e) {
    const int shift = static_cast<int>(std::max<std::int64_t>(base_ - e, -1100));
    sum_hi_ = std::ldexp(sum_hi_, shift);
    sum_lo_ = std::ldexp(sum_lo_, shift);
    base_ = e;
  }

  double sum_hi_ = 0.0;
  double sum_lo_ = 0.0;
  std::int64_t base_ = 0;
  ScaledReal abs_sum_;
};

}  // namespace tacnode
