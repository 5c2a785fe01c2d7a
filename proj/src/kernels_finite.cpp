#include "tacnode/kernels_finite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tacnode/error.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode {

namespace {

constexpr double kLn2 = std::numbers::ln2;
const double kPiQuarter = std::pow(std::numbers::pi, 0.25);

void check_tau(double tau) { require(tau > 0.0 && std::isfinite(tau), "tau must be positive"); }

// log s_n = -(n/2) ln 2 + lgamma(n+1)/2
double log_s(int n) { return -0.5 * n * kLn2 + 0.5 * std::lgamma(n + 1.0); }

struct Arguments {
  double xp, xm;     // (1+4tau) r / (2 sqrt(2 tau)) +- u / (2 sqrt tau)
  double log_ep, log_em;
};

Arguments arguments(double r, double tau, double u, bool conjugated) {
  const double st = std::sqrt(tau);
  const double c = (1.0 + 4.0 * tau) * r / (2.0 * std::sqrt(2.0 * tau));
  const double base = r * r * (16.0 * tau * tau - 8.0 * tau - 1.0) / (16.0 * tau);
  const double lin = r * u * (4.0 * tau - 1.0) / (4.0 * std::numbers::sqrt2 * tau);
  const double quad = conjugated ? 0.0 : -u * u / (8.0 * tau);
  return {c + u / (2.0 * st), c - u / (2.0 * st), base + lin + quad, base - lin + quad};
}

std::vector<ScaledReal> phi_norm_count(double r, double tau, double u, int count, bool conjugated) {
  check_tau(tau);
  const Arguments a = arguments(r, tau, u, conjugated);
  const auto fp = harmonic_oscillator_all(count, a.xp);
  const auto fm = harmonic_oscillator_all(count, a.xm);
  const ScaledReal ep = ScaledReal::exp(a.log_ep);
  const ScaledReal em = ScaledReal::exp(a.log_em);
  ScaledReal pref = ScaledReal(1.0 / (2.0 * std::sqrt(tau) * kPiQuarter));
  const ScaledReal step = ScaledReal(1.0 / std::sqrt(4.0 * tau));
  std::vector<ScaledReal> out(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    const auto k = static_cast<std::size_t>(n);
    out[k] = pref * (ep * fp[k] - em * fm[k]);
    pref *= step;
  }
  return out;
}

std::vector<ScaledReal> psi_norm_count(double r, double tau, double u, int count, bool conjugated) {
  check_tau(tau);
  const Arguments a = arguments(r, tau, u, conjugated);
  const auto fp = harmonic_oscillator_all(count, a.xp);
  const auto fm = harmonic_oscillator_all(count, a.xm);
  const ScaledReal ip = ScaledReal::exp(-a.log_ep);
  const ScaledReal im = ScaledReal::exp(-a.log_em);
  ScaledReal pref = ScaledReal(kPiQuarter);
  const ScaledReal step = ScaledReal(2.0 * std::sqrt(tau));
  std::vector<ScaledReal> out(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) {
    const auto k = static_cast<std::size_t>(n);
    out[k] = pref * (fp[k] * ip - fm[k] * im);
    pref *= step;
  }
  return out;
}

double checked(const ScaledReal& v, const char* what) {
  if (!v.is_zero() && v.exponent() >= 1023) throw NumericalError(std::string(what) + ": value overflows double range");
  return v.to_double();
}

ScaledReal phi_scaled(const ScalingMap& map, double tau, int n, double u) {
  require(n >= 0 && n < map.N, "phi_fn: index must satisfy 0 <= n < N");
  return phi_norm_count(map.r, tau, u, n + 1, false).back() * ScaledReal::exp(log_s(n));
}

ScaledReal psi_scaled(const ScalingMap& map, double tau, int m, double u) {
  require(m >= 0 && m < map.N, "psi_fn: index must satisfy 0 <= m < N");
  return psi_norm_count(map.r, tau, u, m + 1, false).back() * ScaledReal::exp(-log_s(m));
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<ScaledReal>>& cols, int rows, std::int64_t& exponent) {
  std::int64_t e = std::numeric_limits<std::int64_t>::min();
  for (const auto& c : cols)
    for (const auto& x : c)
      if (!x.is_zero()) e = std::max(e, x.exponent());
  if (e == std::numeric_limits<std::int64_t>::min()) e = 0;
  exponent = e;
  Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (int i = 0; i < rows; ++i) m(i, static_cast<Eigen::Index>(j)) = cols[j][static_cast<std::size_t>(i)].ldexp(-e).to_double();
  return m;
}

double log_gauss_2d(double delta, double d) { return -d * d / (4.0 * delta) - 0.5 * std::log(4.0 * std::numbers::pi * delta); }

}  // namespace

ScaledVector ScaledVector::from(const std::vector<ScaledReal>& v) {
  std::int64_t e = 0;
  bool any = false;
  for (const auto& x : v)
    if (!x.is_zero()) {
      e = any ? std::max(e, x.exponent()) : x.exponent();
      any = true;
    }
  ScaledVector s;
  s.exponent = e;
  s.values.resize(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) s.values[static_cast<Eigen::Index>(i)] = v[i].ldexp(-e).to_double();
  return s;
}

double phi_fn(const ScalingMap& map, double tau, int n, double u) { return checked(phi_scaled(map, tau, n, u), "phi_fn"); }

double psi_fn(const ScalingMap& map, double tau, int m, double u) { return checked(psi_scaled(map, tau, m, u), "psi_fn"); }

std::vector<ScaledReal> phi_norm_all(const ScalingMap& map, double tau, double u, bool conjugated) {
  return phi_norm_count(map.r, tau, u, map.N, conjugated);
}

std::vector<ScaledReal> psi_norm_all(const ScalingMap& map, double tau, double u, bool conjugated) {
  return psi_norm_count(map.r, tau, u, map.N, conjugated);
}

// ---------------------------------------------------------------- K0

namespace {

#if defined(__SIZEOF_FLOAT128__)
using Wide = __float128;
constexpr double kWideEps = 1.93e-34;
#else
using Wide = long double;
constexpr double kWideEps = 1.1e-19;
#endif

// Wide -> ScaledReal without relying on a wide frexp.
ScaledReal wide_to_scaled(Wide w) {
  std::int64_t e = 0;
  const Wide big = static_cast<Wide>(std::ldexp(1.0, 900));
  const Wide small = static_cast<Wide>(std::ldexp(1.0, -900));
  while (w > big || w < -big) {
    w *= small;
    e += 900;
  }
  while (w != 0 && w < small && w > -small) {
    w *= big;
    e -= 900;
  }
  return ScaledReal(static_cast<double>(w)).ldexp(e);
}

}  // namespace

// Terms of the residue sum are generated by their ratio recurrence relative
// to the j = 0 term and summed in binary128, so the only rounding amplified
// by cancellation is that of the wide format.
Eigen::MatrixXd K0Matrix::residue_scaled(const ScalingMap& map, double* abs_err) {
  const int n_max = map.N;
  const double r = map.r;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_max, n_max);
  if (r == 0.0) {
    for (int n = 0; n < n_max; ++n) out(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    if (abs_err) *abs_err = 0.0;
    return out;
  }
  const double a = std::numbers::sqrt2 * r;
  const double b = 2.0 * a;
  const Wide ab = static_cast<Wide>(a) * static_cast<Wide>(b);
  double worst = 0.0;
  for (int n = 0; n < n_max; ++n) {
    for (int m = 0; m < n_max; ++m) {
      // t_0 = a^n b^m / m!, times e^{-2r^2} and the similarity factor s_m / s_n.
      const double log_t0 = n * std::log(std::fabs(a)) + m * std::log(std::fabs(b)) - std::lgamma(m + 1.0) - 2.0 * r * r +
                            0.5 * (n - m) * kLn2 + 0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0));
      const int sign0 = (r < 0 && (n + m) % 2 == 1) ? -1 : 1;
      Wide rho = 1;
      Wide sum = 1;
      Wide abs_sum = 1;
      for (int j = 0; j < std::min(n, m); ++j) {
        rho *= -static_cast<Wide>((n - j)) * static_cast<Wide>((m - j)) / (static_cast<Wide>(j + 1) * ab);
        sum += rho;
        abs_sum += rho < 0 ? -rho : rho;
      }
      const ScaledReal t0 = ScaledReal::from_log(log_t0, sign0);
      out(n, m) = (t0 * wide_to_scaled(sum)).to_double();
      const double bound = 8.0 * kWideEps * (std::min(n, m) + 1) * (t0.abs() * wide_to_scaled(abs_sum)).to_double();
      worst = std::max(worst, bound);
    }
  }
  if (abs_err) *abs_err = worst;
  return out;
}

Eigen::MatrixXd K0Matrix::gauss_hermite_scaled(const ScalingMap& map, int nodes) {
  const int n_max = map.N;
  const int m = nodes > 0 ? nodes : n_max;
  const QuadratureRule gh = tacnode::gauss_hermite_scaled(m);
  const double centre = std::numbers::sqrt2 * map.r;
  Eigen::MatrixXd a(n_max, m), b(n_max, m);
  for (int k = 0; k < m; ++k) {
    const double z = gh.nodes[static_cast<std::size_t>(k)];
    const double w = gh.weights[static_cast<std::size_t>(k)];
    const auto fp = harmonic_oscillator_all(n_max, centre + z);
    const auto fm = harmonic_oscillator_all(n_max, centre - z);
    for (int n = 0; n < n_max; ++n) {
      a(n, k) = w * fp[static_cast<std::size_t>(n)].to_double();
      b(n, k) = fm[static_cast<std::size_t>(n)].to_double();
    }
  }
  return a * b.transpose();
}

K0Matrix::K0Matrix(const ScalingMap& map, Route route) : n_(map.N), r_(map.r) {
  require(map.N >= 1, "K0: N must be >= 1");
  require(map.N <= kMaxFiniteN, "K0: N exceeds the finite-N limit of " + std::to_string(kMaxFiniteN));
  const Eigen::MatrixXd gh = gauss_hermite_scaled(map);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n_, n_);
  const double det_gh = (eye - gh).fullPivLu().determinant();

  bool use_residue = route == Route::residue;
  Eigen::MatrixXd res;
  if (route == Route::residue || (route == Route::automatic && n_ <= 200)) {
    res = residue_scaled(map, &cancellation_);
    if (route == Route::automatic) use_residue = cancellation_ <= 1e-12;
  }
  if (use_residue) {
    route_ = Route::residue;
    scaled_ = res;
  } else {
    route_ = Route::gauss_hermite;
    scaled_ = gh;
  }
  const auto lu = (eye - scaled_).fullPivLu();
  det_ = lu.determinant();
  if (use_residue) {
    err_est_ = std::fabs(det_ - det_gh);
  } else {
    const Eigen::MatrixXd gh2 = gauss_hermite_scaled(map, n_ + 4);
    err_est_ = std::fabs(det_ - (eye - gh2).fullPivLu().determinant());
  }
  if (std::fabs(det_) > 1e-300) resolvent_ = lu.inverse();
}

double K0Matrix::entry(int n, int m) const {
  require(n >= 0 && m >= 0 && n < n_ && m < n_, "K0 entry: index out of range");
  return (ScaledReal(scaled_(n, m)) * ScaledReal::exp(log_s(n) - log_s(m))).to_double();
}

// ---------------------------------------------------------------- kernel

FiniteKernel::FiniteKernel(const ScalingMap& map, K0Matrix::Route route) : map_(map), k0_(map, route) {
  if (!(std::fabs(k0_.det()) > 1e-300)) throw NumericalError("finite kernel: 1 - K0 is numerically singular");
}

Eigen::MatrixXd FiniteKernel::phi_matrix(double tau, const std::vector<double>& u, bool conjugated,
                                         std::int64_t& exponent) const {
  std::vector<std::vector<ScaledReal>> cols;
  cols.reserve(u.size());
  for (double x : u) cols.push_back(phi_norm_all(map_, tau, x, conjugated));
  return to_matrix(cols, map_.N, exponent);
}

Eigen::MatrixXd FiniteKernel::psi_matrix(double tau, const std::vector<double>& u, bool conjugated,
                                         std::int64_t& exponent) const {
  std::vector<std::vector<ScaledReal>> cols;
  cols.reserve(u.size());
  for (double x : u) cols.push_back(psi_norm_all(map_, tau, x, conjugated));
  return to_matrix(cols, map_.N, exponent);
}

double FiniteKernel::main_part(double tau1, double u1, double tau2, double u2) const {
  const ScaledVector psi = ScaledVector::from(psi_norm_all(map_, tau1, u1));
  const ScaledVector phi = ScaledVector::from(phi_norm_all(map_, tau2, u2));
  const double d = psi.values.dot(k0_.resolvent() * phi.values);
  return ScaledReal(d).ldexp(psi.exponent + phi.exponent).to_double();
}

double FiniteKernel::extended(double tau1, double u1, double tau2, double u2) const {
  check_tau(tau1);
  check_tau(tau2);
  require(u1 <= 0.0 && u2 <= 0.0, "extended kernel: requires u1, u2 <= 0");
  double k = main_part(tau1, u1, tau2, u2);
  if (tau1 < tau2) k -= reflected_kernel(tau1, tau2, u1, u2);
  return k;
}

double FiniteKernel::original(double t1, double x1, double t2, double x2) const {
  require(t1 > 0.0 && t1 < 1.0 && t2 > 0.0 && t2 < 1.0, "original kernel: times must lie in (0,1)");
  require(x1 <= map_.r && x2 <= map_.r, "original kernel: positions must not exceed r");
  const double k = extended(ScalingMap::tau(t1), map_.u(t1, x1), ScalingMap::tau(t2), map_.u(t2, x2));
  return k / std::sqrt(2.0 * (1.0 - t1) * (1.0 - t2));
}

Eigen::MatrixXd FiniteKernel::conjugated_block(double tau1, const std::vector<double>& u, double tau2,
                                               const std::vector<double>& v) const {
  std::int64_t e_psi = 0, e_phi = 0;
  const Eigen::MatrixXd psi = psi_matrix(tau1, u, true, e_psi);
  const Eigen::MatrixXd phi = phi_matrix(tau2, v, true, e_phi);
  Eigen::MatrixXd out = psi.transpose() * (k0_.resolvent() * phi);
  const int shift = static_cast<int>(std::clamp<std::int64_t>(e_psi + e_phi, -4000, 4000));
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = std::ldexp(out(i, j), shift);
      if (tau1 < tau2)
        out(i, j) -= reflected_kernel_conjugated(tau1, tau2, u[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  return out;
}

// ---------------------------------------------------------------- barrier

double reflected_kernel_conjugated(double tau1, double tau2, double u, double v, double conj_c) {
  require(tau2 > tau1, "reflected kernel: requires tau2 > tau1");
  const double delta = tau2 - tau1;
  double lv = log_gauss_2d(delta, v - u);
  if (conj_c > 0.0) lv += -u * u / (conj_c * tau1) + v * v / (conj_c * tau2);
  return std::exp(lv) * -std::expm1(-u * v / delta);
}

double linear_barrier_kernel(double tau1, double tau2, double la, double lb, double u, double v, double conj_c) {
  require(tau2 > tau1, "barrier kernel: requires tau2 > tau1");
  if (u >= la || v >= lb) return 0.0;
  const double delta = tau2 - tau1;
  double lv = log_gauss_2d(delta, v - u);
  if (conj_c > 0.0) lv += -u * u / (conj_c * tau1) + v * v / (conj_c * tau2);
  return std::exp(lv) * -std::expm1(-(la - u) * (lb - v) / delta);
}

namespace {

constexpr double kTimeTol = 1e-12;

struct Station {
  double tau;
  double level;
};

struct Step {
  bool linear = false;
  double la = 0.0, lb = 0.0;
};

std::vector<Station> stations(const ScalingMap& map, const ThresholdProfile& p, double tau1, double tau2) {
  std::vector<double> taus{tau1, tau2};
  for (const auto& c : p.points) taus.push_back(ScalingMap::tau(c.t));
  for (const auto& s : p.segments) {
    taus.push_back(ScalingMap::tau(s.t_start));
    taus.push_back(ScalingMap::tau(s.t_end));
  }
  std::sort(taus.begin(), taus.end());
  std::vector<Station> out;
  for (double t : taus) {
    if (t < tau1 - kTimeTol || t > tau2 + kTimeTol) continue;
    if (!out.empty() && std::fabs(t - out.back().tau) <= kTimeTol * std::max(1.0, t)) continue;
    out.push_back({t, barrier_level(map, p, t)});
  }
  return out;
}

Step step_between(const ScalingMap& map, const ThresholdProfile& p, double ta, double tb) {
  const double tm = ScalingMap::t_of_tau(0.5 * (ta + tb));
  for (const auto& s : p.segments)
    if (tm > s.t_start && tm < s.t_end) return {true, map.eta(ta, s.h), map.eta(tb, s.h)};
  return {};
}

Eigen::MatrixXd step_matrix(const Step& st, double ta, double tb, const QuadratureRule& rows,
                            const QuadratureRule& cols, double conj_c) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double u = rows.nodes[i];
      const double v = cols.nodes[j];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          st.linear ? linear_barrier_kernel(ta, tb, st.la, st.lb, u, v, conj_c)
                    : (u < 0.0 && v < 0.0 ? reflected_kernel_conjugated(ta, tb, u, v, conj_c) : 0.0);
    }
  return m;
}

void clip_rows(Eigen::MatrixXd& m, const QuadratureRule& q, double level) {
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q.nodes[i] >= level) m.row(static_cast<Eigen::Index>(i)).setZero();
}

QuadratureRule station_rule(double level, double len, double min_gap, int per_panel) {
  const double width = std::clamp(2.5 * std::sqrt(2.0 * min_gap), 0.02, 2.0);
  if (level <= -len) return {};
  return panel_rule(-len, level, per_panel, width);
}

struct Chain {
  std::vector<Station> st;
  std::vector<Step> steps;
  std::vector<QuadratureRule> rules;  // interior stations only (index 1..K-1)
};

Chain build_chain(const ScalingMap& map, const ThresholdProfile& p, double tau1, double tau2, const BarrierOptions& opt) {
  Chain c;
  c.st = stations(map, p, tau1, tau2);
  const std::size_t k = c.st.size();
  const double len = opt.truncation > 0.0 ? opt.truncation : default_truncation(map, tau2);
  c.rules.resize(k);
  for (std::size_t i = 0; i + 1 < k; ++i) c.steps.push_back(step_between(map, p, c.st[i].tau, c.st[i + 1].tau));
  for (std::size_t i = 1; i + 1 < k; ++i) {
    const double g = std::min(c.st[i].tau - c.st[i - 1].tau, c.st[i + 1].tau - c.st[i].tau);
    c.rules[i] = station_rule(c.st[i].level, len, g, opt.nodes_per_panel);
  }
  return c;
}

}  // namespace

double barrier_level(const ScalingMap& map, const ThresholdProfile& profile, double tau) {
  double level = 0.0;
  for (const auto& c : profile.points) {
    const double tc = ScalingMap::tau(c.t);
    if (std::fabs(tc - tau) <= kTimeTol * std::max(1.0, tau)) level = std::min(level, map.eta(tau, c.h));
  }
  for (const auto& s : profile.segments) {
    const double ta = ScalingMap::tau(s.t_start);
    const double tb = ScalingMap::tau(s.t_end);
    if (tau >= ta - kTimeTol && tau <= tb + kTimeTol) level = std::min(level, map.eta(tau, s.h));
  }
  return level;
}

double default_truncation(const ScalingMap& map, double tau_max) {
  const double r = std::fabs(map.r);
  return std::max(12.0, 8.0 * std::numbers::sqrt2 * r * tau_max + 12.0 * std::sqrt(tau_max) +
                            4.0 * std::sqrt(2.0 * tau_max * map.N));
}

Eigen::MatrixXd apply_barrier(const ScalingMap& map, const ThresholdProfile& profile, double tau1, double tau2,
                              const QuadratureRule& rule_in, const QuadratureRule& rule_out,
                              const Eigen::MatrixXd& f, const BarrierOptions& opt) {
  profile.validate();
  require(tau2 >= tau1, "barrier: requires tau1 <= tau2");
  require(f.rows() == static_cast<Eigen::Index>(rule_out.size()), "barrier: f does not match rule_out");
  Chain c = build_chain(map, profile, tau1, tau2, opt);
  Eigen::MatrixXd cur = f;
  clip_rows(cur, rule_out, c.st.back().level);
  if (c.st.size() == 1) {
    require(rule_in.same_as(rule_out), "barrier: zero-length barrier needs identical rules");
    clip_rows(cur, rule_in, c.st.front().level);
    return cur;
  }
  const QuadratureRule* right = &rule_out;
  for (std::size_t i = c.st.size() - 1; i-- > 0;) {
    const QuadratureRule& left = i == 0 ? rule_in : c.rules[i];
    if (left.empty() || right->empty()) return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rule_in.size()), f.cols());
    const Eigen::MatrixXd k = step_matrix(c.steps[i], c.st[i].tau, c.st[i + 1].tau, left, *right, opt.conj_c);
    cur = k * (weight_vector(*right).asDiagonal() * cur);
    clip_rows(cur, left, c.st[i].level);
    right = &left;
  }
  return cur;
}

DiscretizedOperator barrier_operator(const ScalingMap& map, const ThresholdProfile& profile, double tau1,
                                     double tau2, const QuadratureRule& rule_in, const QuadratureRule& rule_out,
                                     const BarrierOptions& opt) {
  profile.validate();
  require(tau2 > tau1, "barrier_operator: requires tau1 < tau2");
  Chain c = build_chain(map, profile, tau1, tau2, opt);
  DiscretizedOperator op;
  for (std::size_t i = 0; i + 1 < c.st.size(); ++i) {
    const QuadratureRule& left = i == 0 ? rule_in : c.rules[i];
    const QuadratureRule& right = i + 2 == c.st.size() ? rule_out : c.rules[i + 1];
    DiscretizedOperator piece;
    piece.row_rule = left;
    piece.col_rule = right;
    piece.matrix = step_matrix(c.steps[i], c.st[i].tau, c.st[i + 1].tau, left, right, opt.conj_c);
    clip_rows(piece.matrix, left, c.st[i].level);
    piece.label = c.steps[i].linear ? "segment" : "reflected";
    op = i == 0 ? piece : compose(op, piece);
  }
  Eigen::MatrixXd t = op.matrix.transpose();
  clip_rows(t, rule_out, c.st.back().level);
  op.matrix = t.transpose();
  op.label = "barrier[" + op.label + "]";
  return op;
}

// ---------------------------------------------------------------- tilde functions

namespace {

struct TildeScaled {
  ScaledReal phi, psi;
};

TildeScaled tilde_scaled(const ScalingMap& map, double t, int n, double x) {
  require(t > 0.0 && t < 1.0, "tilde functions: t must lie in (0,1)");
  require(x <= map.r, "tilde functions: x must not exceed r");
  require(n >= 0, "tilde functions: n must be >= 0");
  const double r = map.r;
  const double s = std::sqrt(2.0 * t * (1.0 - t));
  const double y = 2.0 * r - x;
  const ScaledReal h1 = hermite_poly(n, x / s);
  const ScaledReal h2 = hermite_poly(n, y / s);
  const ScaledReal pphi = ScaledReal::exp(-n * kLn2 - 0.5 * std::log(std::numbers::pi) +
                                          0.5 * (n + 1) * std::log((1.0 - t) / t));
  const ScaledReal ppsi = ScaledReal::exp(-std::lgamma(n + 1.0) + 0.5 * n * std::log(t / (1.0 - t)));
  TildeScaled out;
  out.phi = pphi * (ScaledReal::exp(-x * x / (2.0 * t)) * h1 - ScaledReal::exp(-y * y / (2.0 * t)) * h2);
  out.psi = ppsi * (ScaledReal::exp(-x * x / (2.0 * (1.0 - t))) * h1 - ScaledReal::exp(-y * y / (2.0 * (1.0 - t))) * h2);
  return out;
}

double rel_diff(const ScaledReal& a, const ScaledReal& b) {
  const ScaledReal d = (a - b).abs();
  if (d.is_zero()) return 0.0;
  const ScaledReal m = abs_less(a, b) ? b.abs() : a.abs();
  return (d / m).to_double();
}

}  // namespace

std::pair<double, double> tilde_functions(const ScalingMap& map, double t, int n, double x) {
  const TildeScaled v = tilde_scaled(map, t, n, x);
  return {checked(v.phi, "tilde_functions"), checked(v.psi, "tilde_functions")};
}

double conjugation_check(const ScalingMap& map, double tau, int n, double u) {
  check_tau(tau);
  require(u <= 0.0, "conjugation_check: requires u <= 0");
  const double r = map.r;
  const double t = ScalingMap::t_of_tau(tau);
  const double x = map.x(t, u);
  const TildeScaled tl = tilde_scaled(map, t, n, x);
  const double g = r * r / 2.0 + (x - r) * (x - r) / (2.0 * (1.0 - t));
  double worst = rel_diff(phi_scaled(map, tau, n, u), ScaledReal::exp(-g) * tl.phi);
  worst = std::max(worst, rel_diff(psi_scaled(map, tau, n, u), ScaledReal::exp(g) * tl.psi));

  const double tau2 = 2.0 * tau + 0.1;
  const double u2 = u - 0.3;
  const double t2 = ScalingMap::t_of_tau(tau2);
  const double x2 = map.x(t2, u2);
  const double dt = t2 - t;
  const double tt = (std::exp(-(x - x2) * (x - x2) / (2.0 * dt)) -
                     std::exp(-(2.0 * r - x - x2) * (2.0 * r - x - x2) / (2.0 * dt))) /
                    std::sqrt(2.0 * std::numbers::pi * dt);
  const double rhs = std::sqrt(2.0 * (1.0 - t) * (1.0 - t2)) *
                     std::exp((x - r) * (x - r) / (2.0 * (1.0 - t)) - (x2 - r) * (x2 - r) / (2.0 * (1.0 - t2))) * tt;
  worst = std::max(worst, rel_diff(ScaledReal(reflected_kernel(tau, tau2, u, u2)), ScaledReal(rhs)));
  return worst;
}

}  // namespace tacnode

namespace tacnode {

namespace {

ScaledReal weighted_sum(const std::vector<ScaledReal>& terms) {
  CompensatedSum s;
  for (const auto& t : terms) s.add(t);
  return s.value();
}

double relative_error(const std::vector<ScaledReal>& lhs, const std::vector<ScaledReal>& rhs) {
  ScaledReal scale, worst;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (abs_less(scale, rhs[i])) scale = rhs[i].abs();
    const ScaledReal d = (lhs[i] - rhs[i]).abs();
    if (abs_less(worst, d)) worst = d;
  }
  if (worst.is_zero()) return 0.0;
  if (scale.is_zero()) return HUGE_VAL;
  return (worst / scale).to_double();
}

}  // namespace

CompatibilityErrors compatibility_check(const ScalingMap& map, double tau1, double tau2,
                                        const std::vector<double>& points, int nodes_per_panel) {
  check_tau(tau1);
  require(tau2 > tau1, "compatibility_check: requires tau2 > tau1");
  for (double p : points) require(p <= 0.0, "compatibility_check: points must be <= 0");
  const int n = map.N;
  const double len = default_truncation(map, tau2);
  const double width = std::clamp(4.0 * std::sqrt(tau1) / std::sqrt(2.0 * n + 1.0), 0.05, 0.5);
  const QuadratureRule q = panel_rule(-len, 0.0, nodes_per_panel, width);
  std::vector<std::vector<ScaledReal>> phi1, psi1, phi2, psi2;
  for (double u : q.nodes) {
    phi1.push_back(phi_norm_all(map, tau1, u, true));
    psi1.push_back(psi_norm_all(map, tau1, u, true));
    phi2.push_back(phi_norm_all(map, tau2, u, true));
    psi2.push_back(psi_norm_all(map, tau2, u, true));
  }
  CompatibilityErrors out;
  for (int k = 0; k < n; ++k) {
    std::vector<ScaledReal> lt, rt, lp, rp;
    for (double p : points) {
      std::vector<ScaledReal> a, b;
      for (std::size_t j = 0; j < q.size(); ++j) {
        a.push_back(phi1[j][static_cast<std::size_t>(k)] * ScaledReal(q.weights[j] * reflected_kernel_conjugated(tau1, tau2, q.nodes[j], p)));
        b.push_back(psi2[j][static_cast<std::size_t>(k)] * ScaledReal(q.weights[j] * reflected_kernel_conjugated(tau1, tau2, p, q.nodes[j])));
      }
      lt.push_back(weighted_sum(a));
      rt.push_back(phi_norm_all(map, tau2, p, true)[static_cast<std::size_t>(k)]);
      lp.push_back(weighted_sum(b));
      rp.push_back(psi_norm_all(map, tau1, p, true)[static_cast<std::size_t>(k)]);
    }
    out.phi_t = std::max(out.phi_t, relative_error(lt, rt));
    out.t_psi = std::max(out.t_psi, relative_error(lp, rp));
  }
  const K0Matrix k0(map);
  for (int which = 0; which < 2; ++which) {
    const auto& ph = which == 0 ? phi1 : phi2;
    const auto& ps = which == 0 ? psi1 : psi2;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::vector<ScaledReal> terms;
        for (std::size_t j = 0; j < q.size(); ++j)
          terms.push_back(ph[j][static_cast<std::size_t>(a)] * ps[j][static_cast<std::size_t>(b)] * ScaledReal(q.weights[j]));
        const double lhs = weighted_sum(terms).to_double();
        const double rhs = (a == b ? 1.0 : 0.0) - k0.scaled()(a, b);
        out.phi_psi = std::max(out.phi_psi, std::fabs(lhs - rhs));
      }
  }
  return out;
}

}  // namespace tacnode
