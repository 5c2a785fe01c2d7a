#include "tacnode/kernels_limit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tacnode/error.hpp"
#include "tacnode/operator.hpp"
#include "tacnode/specfun.hpp"

namespace tacnode {

namespace {

const double kCbrtHalf = std::cbrt(0.5);  // 2^{-1/3}

// Ai^{(s)}(x) e^{logfac}, with every exponential combined before exp().
double shifted_times(double s, double x, double logfac) {
  const AiryValue a = airy_ai_scaled(s * s + x);
  if (a.ai == 0.0) return 0.0;
  const double l = 2.0 * s * s * s / 3.0 + x * s + a.log_scale + logfac;
  if (l > 700.0) throw NumericalError("Airy factor overflows double range");
  return a.ai * std::exp(l);
}

double log_gauss(double delta, double x) {
  // phi_{2 delta}(x): variance 2 delta
  return -x * x / (4.0 * delta) - 0.5 * std::log(4.0 * std::numbers::pi * delta);
}

// Where rate*xi - (2/3)(xi + shift)_+^{3/2} has dropped 37 below its running
// maximum and is decreasing.
double xi_extent(double rate, double shift, double floor_value) {
  double best = -HUGE_VAL;
  for (double xi = 0.0; xi < 400.0; xi += 0.5) {
    const double x = std::max(0.0, xi + shift);
    const double g = rate * xi - 2.0 / 3.0 * x * std::sqrt(x);
    best = std::max(best, g);
    if (g < best - 37.0 && std::sqrt(x) > rate) return std::max(floor_value, xi + 1.0);
  }
  throw NumericalError("xi integral does not converge within truncation control");
}

QuadratureRule xi_rule_to(double extent) {
  const int panels = std::max(1, static_cast<int>(std::ceil(extent)));
  return panel_rule(0.0, extent, 16, extent / panels);
}

// The two limit kernels share one factorized form
//   main(T1,u; T2,v) = sum_xi Psi_{T1}^xi(u) G(xi, zeta) Phi_{T2}^zeta(v),
// with Psi^xi(u) = Ai^{(-T)}(R+xi+u) [- Ai^{(-T)}(R+xi-u) with the wall],
// and G = diag(w) on the identity rule plus the resolvent correction.
struct XiModel {
  double R = 0.0;
  bool wall = true;
  const LimitKernel* kernel = nullptr;  // resolvent correction, tacnode only

  // Rows u_i, columns over the identity rule followed by the resolvent rule.
  Eigen::MatrixXd fn(double s, const std::vector<double>& u, const QuadratureRule& id, double conj) const {
    const QuadratureRule* res = kernel ? &kernel->xi_rule() : nullptr;
    const Eigen::Index nid = static_cast<Eigen::Index>(id.size());
    const Eigen::Index nres = res ? static_cast<Eigen::Index>(res->size()) : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(u.size()), nid + nres);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double ui = u[i];
      const double lf = conj * ui;
      auto val = [&](double xi) {
        double v = shifted_times(s, R + xi + ui, lf);
        if (wall) v -= shifted_times(s, R + xi - ui, lf);
        return v;
      };
      const Eigen::Index r = static_cast<Eigen::Index>(i);
      for (Eigen::Index k = 0; k < nid; ++k) m(r, k) = val(id.nodes[static_cast<std::size_t>(k)]);
      for (Eigen::Index k = 0; k < nres; ++k) m(r, nid + k) = val(res->nodes[static_cast<std::size_t>(k)]);
    }
    return m;
  }

  // psi * G * phi^T
  Eigen::MatrixXd contract(const Eigen::MatrixXd& psi, const Eigen::MatrixXd& phi, const QuadratureRule& id) const {
    const Eigen::Index nid = static_cast<Eigen::Index>(id.size());
    const Eigen::VectorXd w = weight_vector(id);
    Eigen::MatrixXd out = psi.leftCols(nid) * w.asDiagonal() * phi.leftCols(nid).transpose();
    if (kernel) {
      const Eigen::Index nres = psi.cols() - nid;
      out += psi.rightCols(nres) * kernel->correction() * phi.rightCols(nres).transpose();
    }
    return out;
  }

  QuadratureRule identity_rule(double T1, double T2, double u_min) const {
    return identity_rule_for(std::fabs(T1) + std::fabs(T2), u_min + std::min(T1 * T1, T2 * T2));
  }

  // rate bounds |T1| + |T2|, shift bounds u + T^2 from below
  QuadratureRule identity_rule_for(double rate, double shift) const {
    const double floor_value = kernel ? kernel->Lambda() : 1.0;
    return xi_rule_to(xi_extent(rate, R + shift, floor_value));
  }
};

double reflected_conj(double T1, double T2, double u, double v, double c1, double c2, bool wall) {
  const double delta = T2 - T1;
  const double l = log_gauss(delta, v - u) + c1 * u - c2 * v;
  if (!wall) return std::exp(l);
  if (u >= 0.0 || v >= 0.0) return 0.0;
  return std::exp(l) * -std::expm1(-u * v / delta);
}

}  // namespace

// ---------------------------------------------------------------- pointwise

double phi_hat(double R, double T, double xi, double U) {
  return airy_shifted(T, R + xi + U) - airy_shifted(T, R + xi - U);
}

double psi_hat(double R, double T, double zeta, double U) {
  return airy_shifted(-T, R + zeta + U) - airy_shifted(-T, R + zeta - U);
}

double k0_hat(double R, double xi, double zeta) { return kCbrtHalf * airy_ai(kCbrtHalf * (2.0 * R + xi + zeta)); }

// ---------------------------------------------------------------- LimitKernel

LimitKernel::LimitKernel(const LimitParams& params) : params_(params) {
  require(std::isfinite(params_.R), "limit kernel: R must be finite");
  require(params_.nodes >= 40, "limit kernel: at least 40 nodes required");
  if (params_.Lambda <= 0.0) params_.Lambda = std::max(20.0, 20.0 - 2.0 * params_.R);
  rule_ = gauss_legendre(0.0, params_.Lambda, params_.nodes);
  const Eigen::Index n = static_cast<Eigen::Index>(rule_.size());
  k_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      k_(i, j) = k_(j, i) = k0_hat(params_.R, rule_.nodes[static_cast<std::size_t>(i)], rule_.nodes[static_cast<std::size_t>(j)]);
  const Eigen::VectorXd sw = weight_vector(rule_).cwiseSqrt();
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - sw.asDiagonal() * k_ * sw.asDiagonal();
  lu_.compute(a);
  det_ = lu_.determinant();
  if (!(std::fabs(det_) > 1e-300)) throw NumericalError("limit kernel: 1 - K0 is singular");
  const Eigen::MatrixXd inv = lu_.inverse();
  correction_ = sw.asDiagonal() * (inv - Eigen::MatrixXd::Identity(n, n)) * sw.asDiagonal();
}

double LimitKernel::identity_extent(double T1, double T2, double u_min) const {
  XiModel m{params_.R, true, this};
  return m.identity_rule(T1, T2, u_min).b;
}

Eigen::MatrixXd LimitKernel::main_block(double T1, const std::vector<double>& u, double T2, const std::vector<double>& v,
                                        double c1, double c2) const {
  if (u.empty() || v.empty()) return Eigen::MatrixXd(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(v.size()));
  XiModel m{params_.R, true, this};
  const double umin = std::min(*std::min_element(u.begin(), u.end()), *std::min_element(v.begin(), v.end()));
  const QuadratureRule id = m.identity_rule(T1, T2, umin);
  return m.contract(m.fn(-T1, u, id, c1), m.fn(T2, v, id, -c2), id);
}

Eigen::MatrixXd LimitKernel::block(double T1, const std::vector<double>& u, double T2, const std::vector<double>& v) const {
  for (double x : u) require(x <= 0.0, "limit kernel: U1 must be <= 0");
  for (double x : v) require(x <= 0.0, "limit kernel: U2 must be <= 0");
  Eigen::MatrixXd out = main_block(T1, u, T2, v);
  if (T1 < T2)
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -= reflected_conj(T1, T2, u[i], v[j], 0.0, 0.0, true);
  return out;
}

double LimitKernel::main_part(double T1, double U1, double T2, double U2) const {
  return main_block(T1, {U1}, T2, {U2})(0, 0);
}

double LimitKernel::extended(double T1, double U1, double T2, double U2) const {
  return block(T1, {U1}, T2, {U2})(0, 0);
}

RankOne LimitKernel::rank_one(double T1, double U1, double T2, double U2) const {
  require(U1 <= 0.0 && U2 <= 0.0, "rank_one: U must be <= 0");
  const Eigen::Index n = static_cast<Eigen::Index>(rule_.size());
  const Eigen::VectorXd sw = weight_vector(rule_).cwiseSqrt();
  Eigen::VectorXd k0row(n), psi(n), phi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double xi = rule_.nodes[static_cast<std::size_t>(j)];
    k0row(j) = k0_hat(params_.R, 0.0, xi);
    psi(j) = psi_hat(params_.R, T1, xi, U1);
    phi(j) = phi_hat(params_.R, T2, xi, U2);
  }
  // Natural interpolation of (1 - K0) z = y at 0: z(0) = y(0) + sum K0(0, xi_j) w_j z_j.
  auto at_zero = [&](const Eigen::VectorXd& y, double y0) {
    const Eigen::VectorXd zh = lu_.solve(sw.cwiseProduct(y));
    return y0 + k0row.dot(sw.cwiseProduct(zh));
  };
  RankOne r;
  r.f = at_zero(psi, psi_hat(params_.R, T1, 0.0, U1));
  r.g = at_zero(phi, phi_hat(params_.R, T2, 0.0, U2));
  r.product = r.f * r.g;
  return r;
}

// ---------------------------------------------------------------- Airy

double extended_airy_kernel(double T1, double U1, double T2, double U2) {
  const double shift = std::max(U1 + T1 * T1, U2 + T2 * T2);
  const QuadratureRule q = xi_rule_to(xi_extent(T2 - T1, shift, 1.0));
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double xi = q.nodes[k];
    const AiryValue a = airy_ai_scaled(xi + U1 + T1 * T1);
    const AiryValue b = airy_ai_scaled(xi + U2 + T2 * T2);
    s += q.weights[k] * a.ai * b.ai * std::exp(xi * (T2 - T1) + a.log_scale + b.log_scale);
  }
  if (T1 < T2) {
    const double c = 2.0 * (T1 * T1 * T1 - T2 * T2 * T2) / 3.0 + T1 * U1 - T2 * U2;
    s -= std::exp(log_gauss(T2 - T1, U1 - U2) + c);
  }
  return s;
}

DetResult airy_gap(double s, int nodes) {
  require(std::isfinite(s), "airy_gap: s must be finite");
  require(nodes >= 10, "airy_gap: too few nodes");
  auto once = [&](int m) {
    const double top = std::max(s, 0.0) + 16.0;
    const QuadratureRule win = panel_rule(s, top, m, 1.0);
    XiModel model{0.0, false, nullptr};
    const QuadratureRule id = model.identity_rule(0.0, 0.0, s);
    const Eigen::MatrixXd f = model.fn(0.0, win.nodes, id, 0.0);
    return nystrom_det(model.contract(f, f, id), weight_vector(win));
  };
  const int per = std::max(8, nodes / 16);
  DetResult d;
  d.value = once(per);
  d.err_est = std::fabs(d.value - once(static_cast<int>(std::ceil(1.5 * per))));
  d.method = "nystrom";
  return d;
}

// ---------------------------------------------------------------- gap

void LimitSlices::validate() const {
  for (std::size_t i = 0; i < slices.size(); ++i) {
    require(std::isfinite(slices[i].T) && std::isfinite(slices[i].a), "limit slices: values must be finite");
    require(slices[i].a <= 0.0, "limit slices: window [a, 0] needs a <= 0");
    if (i > 0) require(slices[i].T > slices[i - 1].T, "limit slices: times must be strictly increasing");
  }
}

namespace {

double limit_gap_once(const LimitKernel& kernel, const std::vector<LimitSlice>& sl, int per_panel) {
  const XiModel model{kernel.R(), true, &kernel};
  std::vector<QuadratureRule> rules;
  double tmax = 0.0, shift = HUGE_VAL;
  for (const auto& s : sl) {
    rules.push_back(panel_rule(s.a, 0.0, per_panel, 0.5));
    tmax = std::max(tmax, std::fabs(s.T));
    shift = std::min(shift, s.a + s.T * s.T);
  }
  const QuadratureRule id = model.identity_rule_for(2.0 * tmax, shift);
  // Conjugation by e^{T u} keeps Psi^ and Phi^ bounded on deep windows.
  std::vector<Eigen::MatrixXd> psi, phi;
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < sl.size(); ++i) {
    psi.push_back(model.fn(-sl[i].T, rules[i].nodes, id, sl[i].T));
    phi.push_back(model.fn(sl[i].T, rules[i].nodes, id, -sl[i].T));
    total += static_cast<Eigen::Index>(rules[i].size());
  }
  Eigen::MatrixXd k(total, total);
  Eigen::VectorXd w(total);
  Eigen::Index r0 = 0;
  for (std::size_t i = 0; i < sl.size(); ++i) {
    const Eigen::Index ni = static_cast<Eigen::Index>(rules[i].size());
    w.segment(r0, ni) = weight_vector(rules[i]);
    Eigen::Index c0 = 0;
    for (std::size_t j = 0; j < sl.size(); ++j) {
      const Eigen::Index nj = static_cast<Eigen::Index>(rules[j].size());
      Eigen::MatrixXd b = model.contract(psi[i], phi[j], id);
      if (i < j)
        for (Eigen::Index p = 0; p < ni; ++p)
          for (Eigen::Index q = 0; q < nj; ++q)
            b(p, q) -= reflected_conj(sl[i].T, sl[j].T, rules[i].nodes[static_cast<std::size_t>(p)],
                                      rules[j].nodes[static_cast<std::size_t>(q)], sl[i].T, sl[j].T, true);
      k.block(r0, c0, ni, nj) = b;
      c0 += nj;
    }
    r0 += ni;
  }
  return nystrom_det(k, w);
}

}  // namespace

DetResult limit_gap_probability(const LimitKernel& kernel, const LimitSlices& slices, const FredholmOptions& opt) {
  slices.validate();
  std::vector<LimitSlice> sl;
  for (const auto& s : slices.slices)
    if (s.a < 0.0) sl.push_back(s);
  DetResult d;
  d.method = "nystrom";
  if (sl.empty()) return d;
  d.value = limit_gap_once(kernel, sl, opt.nodes_per_panel);
  if (opt.estimate_error)
    d.err_est = std::fabs(d.value - limit_gap_once(kernel, sl, static_cast<int>(std::ceil(1.5 * opt.nodes_per_panel))));
  return d;
}

// ---------------------------------------------------------------- functional

namespace {

struct Interval {
  double t0, t1;
  double level;  // barrier in U coordinates; +inf for none
};

// (F - T^b)(u, w) for the free propagator F (killed at 0 with the wall,
// the plain heat kernel without) and the barrier propagator T^b at level b.
double barrier_defect(double delta, double b, double u, double w, bool wall) {
  if (wall && (u >= 0.0 || w >= 0.0)) return 0.0;
  if (u < b && w < b) {
    const double img = std::exp(log_gauss(delta, w + u - 2.0 * b));
    return wall ? img * -std::expm1(-b * (w + u - b) / delta) : img;
  }
  if (!wall) return std::exp(log_gauss(delta, w - u));
  return std::exp(log_gauss(delta, w - u)) * -std::expm1(-u * w / delta);
}

double barrier_step(double delta, double b, double u, double w) {
  if (u >= b || w >= b) return 0.0;
  return std::exp(log_gauss(delta, w - u)) * -std::expm1(-(b - u) * (b - w) / delta);
}

std::vector<Interval> intervals_of(double T1, double T2, const std::vector<HSegment>& h, double R, bool wall) {
  std::vector<double> cuts{T1, T2};
  for (const auto& s : h) {
    require(s.T_start < s.T_end, "H segment: start must precede end");
    require(s.T_start >= T1 - 1e-12 && s.T_end <= T2 + 1e-12, "H segment must lie inside [T1, T2]");
    if (wall) require(s.H <= R, "H must not exceed R");
    cuts.push_back(std::clamp(s.T_start, T1, T2));
    cuts.push_back(std::clamp(s.T_end, T1, T2));
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> st;
  for (double c : cuts)
    if (st.empty() || c - st.back() > 1e-12) st.push_back(c);
  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    const double mid = 0.5 * (st[i] + st[i + 1]);
    double level = HUGE_VAL;
    for (const auto& s : h)
      if (s.T_start <= mid && mid <= s.T_end) level = std::min(level, s.H - R);
    if (!wall && !std::isfinite(level)) throw DomainError("H segments must cover [T1, T2]");
    if (wall) level = std::min(level, 0.0);
    out.push_back({st[i], st[i + 1], level});
  }
  return out;
}

double functional_once(const XiModel& model, double T1, double T2, const std::vector<Interval>& iv, double len, double top,
                       int per_panel) {
  const bool wall = model.wall;
  double dmin = HUGE_VAL, bmin = HUGE_VAL;
  for (const auto& x : iv) {
    dmin = std::min(dmin, x.t1 - x.t0);
    bmin = std::min(bmin, x.level);
  }
  const double width = std::clamp(std::sqrt(2.0 * dmin), 0.1, 0.5);
  const double lo = -len;
  const QuadratureRule id = model.identity_rule(T1, T2, lo);

  const QuadratureRule rule0 = panel_rule(lo, top, per_panel, width, {iv.front().level});
  const Eigen::Index n0 = static_cast<Eigen::Index>(rule0.size());
  const Eigen::MatrixXd psi0 = model.fn(-T1, rule0.nodes, id, T1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n0, psi0.cols());
  // Rows at or above the first level: no barrier applies before the path
  // leaves, so D = Psi_{T1} exactly.
  for (Eigen::Index i = 0; i < n0; ++i)
    if (rule0.nodes[static_cast<std::size_t>(i)] >= iv.front().level) d.row(i) = psi0.row(i);

  // T - T^H = sum_k T^b_1 ... T^b_{k-1} (F_k - T^b_k) F_{k+1} ... F_n, and
  // F_{k+1} ... F_n Psi_{T2} = Psi_{s_k}.
  Eigen::MatrixXd chain;  // T^b_1 ... T^b_{k-1} with weights, rows rule0
  QuadratureRule chain_rule = rule0;
  for (std::size_t k = 0; k < iv.size(); ++k) {
    const Interval& x = iv[k];
    const double delta = x.t1 - x.t0;
    const bool active = wall ? x.level < 0.0 : true;
    if (active) {
      const QuadratureRule wr = panel_rule(lo, top, per_panel, width, {x.level});
      const Eigen::MatrixXd psi = model.fn(-x.t1, wr.nodes, id, 0.0);
      Eigen::MatrixXd def(static_cast<Eigen::Index>(chain_rule.size()), static_cast<Eigen::Index>(wr.size()));
      for (std::size_t i = 0; i < chain_rule.size(); ++i)
        for (std::size_t j = 0; j < wr.size(); ++j)
          def(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              barrier_defect(delta, x.level, chain_rule.nodes[i], wr.nodes[j], wall) * wr.weights[j];
      Eigen::MatrixXd term = def * psi;
      if (k > 0) term = chain * term;
      // rows below the first level only; the rows above were set exactly
      for (Eigen::Index i = 0; i < n0; ++i)
        if (rule0.nodes[static_cast<std::size_t>(i)] < iv.front().level) d.row(i) += term.row(i);
    }
    if (k + 1 == iv.size()) break;
    // extend the chain by T^b_k into the station at x.t1
    if (x.level <= lo) break;  // nothing survives below the truncation
    const QuadratureRule nr = panel_rule(lo, x.level, per_panel, width);
    Eigen::MatrixXd step(static_cast<Eigen::Index>(chain_rule.size()), static_cast<Eigen::Index>(nr.size()));
    for (std::size_t i = 0; i < chain_rule.size(); ++i)
      for (std::size_t j = 0; j < nr.size(); ++j)
        step(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            barrier_step(delta, x.level, chain_rule.nodes[i], nr.nodes[j]) * nr.weights[j];
    chain = k == 0 ? step : Eigen::MatrixXd(chain * step);
    chain_rule = nr;
  }
  // conjugate rows by e^{T1 u}; Phi carries e^{-T1 v}
  for (Eigen::Index i = 0; i < n0; ++i)
    if (rule0.nodes[static_cast<std::size_t>(i)] < iv.front().level)
      d.row(i) *= std::exp(T1 * rule0.nodes[static_cast<std::size_t>(i)]);
  const Eigen::MatrixXd phi0 = model.fn(T1, rule0.nodes, id, -T1);
  return nystrom_det(model.contract(d, phi0, id), weight_vector(rule0));
}

DetResult functional_common(const XiModel& model, double T1, double T2, const std::vector<Interval>& iv, double top,
                            const FredholmOptions& opt) {
  DetResult d;
  d.method = "nystrom";
  double bmin = 0.0;
  bool any = false;
  for (const auto& x : iv)
    if (std::isfinite(x.level) && (!model.wall || x.level < 0.0)) {
      bmin = any ? std::min(bmin, x.level) : x.level;
      any = true;
    }
  if (!any) return d;
  const double len = opt.truncation > 0.0 ? opt.truncation : std::max(0.0, -bmin) + 12.0 * std::sqrt(T2 - T1) + 4.0;
  d.value = functional_once(model, T1, T2, iv, len, top, opt.nodes_per_panel);
  if (opt.estimate_error)
    d.err_est = std::fabs(d.value - functional_once(model, T1, T2, iv, 1.25 * len, top,
                                                    static_cast<int>(std::ceil(1.5 * opt.nodes_per_panel))));
  return d;
}

}  // namespace

DetResult functional_limit_det(const LimitKernel& kernel, double T1, double T2, const std::vector<HSegment>& h,
                               const FredholmOptions& opt) {
  require(T1 < T2, "functional determinant: requires T1 < T2");
  const XiModel model{kernel.R(), true, &kernel};
  return functional_common(model, T1, T2, intervals_of(T1, T2, h, kernel.R(), true), 0.0, opt);
}

DetResult airy2_stay_below(double T1, double T2, const std::vector<HSegment>& h, const FredholmOptions& opt) {
  require(T1 < T2, "Airy2 stay-below: requires T1 < T2");
  const XiModel model{0.0, false, nullptr};
  const std::vector<Interval> iv = intervals_of(T1, T2, h, 0.0, false);
  double hmax = -HUGE_VAL;
  for (const auto& x : iv) hmax = std::max(hmax, x.level);
  const double top = std::max(hmax, 0.0) + 14.0 + 2.0 * std::max(std::fabs(T1), std::fabs(T2));
  return functional_common(model, T1, T2, iv, top, opt);
}

}  // namespace tacnode
