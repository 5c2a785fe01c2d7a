#include "tacnode/fredholm.hpp"

#include <algorithm>
#include <cmath>

#include "tacnode/error.hpp"
#include "tacnode/operator.hpp"

namespace tacnode {

namespace {

double auto_width(const ScalingMap& map, double tau, const FredholmOptions& opt) {
  if (opt.panel_width > 0.0) return opt.panel_width;
  // phi_n oscillates on a scale 1/sqrt(2N) in x = c + u / (2 sqrt tau).
  return std::clamp(8.0 * std::sqrt(tau) / std::sqrt(2.0 * map.N + 1.0), 0.1, 1.0);
}

FredholmOptions refined(const FredholmOptions& opt) {
  FredholmOptions o = opt;
  o.nodes_per_panel = static_cast<int>(std::ceil(1.5 * opt.nodes_per_panel));
  o.estimate_error = false;
  return o;
}

std::vector<double> nodes_of(const QuadratureRule& q) { return q.nodes; }

// Rescale two blocks carrying powers of two to a common exponent.
Eigen::MatrixXd aligned_difference(const Eigen::MatrixXd& a, std::int64_t ea, const Eigen::MatrixXd& b, std::int64_t eb,
                                   std::int64_t& e) {
  e = std::max(ea, eb);
  const int sa = static_cast<int>(std::max<std::int64_t>(ea - e, -2000));
  const int sb = static_cast<int>(std::max<std::int64_t>(eb - e, -2000));
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out(i, j) = std::ldexp(a(i, j), sa) - std::ldexp(b(i, j), sb);
  return out;
}

std::pair<double, double> support(const ThresholdProfile& p) {
  if (p.kind == ThresholdProfile::Kind::points && !p.points.empty())
    return {ScalingMap::tau(p.points.front().t), ScalingMap::tau(p.points.back().t)};
  if (p.kind == ThresholdProfile::Kind::segments && !p.segments.empty())
    return {ScalingMap::tau(p.segments.front().t_start), ScalingMap::tau(p.segments.back().t_end)};
  return {0.0, 0.0};
}

bool trivial(const ThresholdProfile& p) {
  for (const auto& c : p.points)
    if (c.h < p.r) return false;
  for (const auto& s : p.segments)
    if (s.h < p.r) return false;
  return true;
}

struct Reduced {
  Eigen::MatrixXd d;  // rows: nodes at tau1, columns: n (Psi_{tau1} - T^h Psi_{tau2})
  std::int64_t ed = 0;
  Eigen::MatrixXd phi;  // N x m, conjugated Phi_{tau1}
  std::int64_t ephi = 0;
  Eigen::MatrixXd psih;  // T^h Psi_{tau2} at tau1 nodes (m x N)
  std::int64_t epsih = 0;
  QuadratureRule rule;
};

Reduced reduce(const FiniteKernel& kernel, const ThresholdProfile& profile, const FredholmOptions& opt) {
  const ScalingMap& map = kernel.map();
  const auto [ta, tb] = support(profile);
  const double len = opt.truncation > 0.0 ? opt.truncation : default_truncation(map, tb);
  const double width = auto_width(map, ta, opt);
  const double eta_a = barrier_level(map, profile, ta);
  const double eta_b = barrier_level(map, profile, tb);
  Reduced out;
  out.rule = panel_rule(-len, 0.0, opt.nodes_per_panel, width, {eta_a});
  const QuadratureRule rule_b = ta == tb ? out.rule : panel_rule(-len, 0.0, opt.nodes_per_panel, auto_width(map, tb, opt), {eta_b});

  std::int64_t e_psi_a = 0, e_psi_b = 0;
  const Eigen::MatrixXd psi_a = kernel.psi_matrix(ta, nodes_of(out.rule), true, e_psi_a).transpose();
  const Eigen::MatrixXd psi_b = kernel.psi_matrix(tb, nodes_of(rule_b), true, e_psi_b).transpose();
  BarrierOptions bo;
  bo.nodes_per_panel = opt.nodes_per_panel;
  bo.truncation = len;
  out.psih = apply_barrier(map, profile, ta, tb, out.rule, rule_b, psi_b, bo);
  out.epsih = e_psi_b;
  out.d = aligned_difference(psi_a, e_psi_a, out.psih, e_psi_b, out.ed);
  out.phi = kernel.phi_matrix(ta, nodes_of(out.rule), true, out.ephi);
  return out;
}

double conditional_once(const FiniteKernel& kernel, const ThresholdProfile& profile, const FredholmOptions& opt) {
  const Reduced r = reduce(kernel, profile, opt);
  Eigen::MatrixXd a = r.d * (kernel.k0().resolvent() * r.phi);
  const int shift = static_cast<int>(std::clamp<std::int64_t>(r.ed + r.ephi, -4000, 4000));
  a = a.unaryExpr([shift](double x) { return std::ldexp(x, shift); });
  return nystrom_det(a, weight_vector(r.rule));
}

double reduced_once(const FiniteKernel& kernel, const ThresholdProfile& profile, const FredholmOptions& opt) {
  const Reduced r = reduce(kernel, profile, opt);
  // det(int Phi_{tau1} T^h Psi_{tau2}) / det(1 - K0), in the normalised basis.
  Eigen::MatrixXd m = r.phi * weight_vector(r.rule).asDiagonal() * r.psih;
  const double log_scale = static_cast<double>(r.ephi + r.epsih) * std::numbers::ln2;
  const auto lu = m.fullPivLu();
  const double det = lu.determinant();
  if (det == 0.0) return 0.0;
  const double l = std::log(std::fabs(det)) + kernel.map().N * log_scale - std::log(std::fabs(kernel.k0().det()));
  const double sign = (det < 0) == (kernel.k0().det() < 0) ? 1.0 : -1.0;
  return sign * std::exp(l);
}

double multipoint_once(const FiniteKernel& kernel, const TimeSlices& ts, const FredholmOptions& opt) {
  const ScalingMap& map = kernel.map();
  struct Block {
    double tau;
    QuadratureRule rule;
    Eigen::MatrixXd psi, gphi;
    std::int64_t epsi = 0, ephi = 0;
  };
  std::vector<Block> blocks;
  for (const auto& s : ts.slices) {
    if (s.eta >= 0.0) continue;
    Block b;
    b.tau = s.tau;
    b.rule = panel_rule(s.eta, 0.0, opt.nodes_per_panel, auto_width(map, s.tau, opt));
    b.psi = kernel.psi_matrix(s.tau, b.rule.nodes, true, b.epsi);
    b.gphi = kernel.k0().resolvent() * kernel.phi_matrix(s.tau, b.rule.nodes, true, b.ephi);
    blocks.push_back(std::move(b));
  }
  if (blocks.empty()) return 1.0;
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += static_cast<Eigen::Index>(b.rule.size());
  Eigen::MatrixXd k(total, total);
  Eigen::VectorXd w(total);
  Eigen::Index oi = 0;
  for (const auto& bi : blocks) {
    const auto mi = static_cast<Eigen::Index>(bi.rule.size());
    w.segment(oi, mi) = weight_vector(bi.rule);
    Eigen::Index oj = 0;
    for (const auto& bj : blocks) {
      const auto mj = static_cast<Eigen::Index>(bj.rule.size());
      Eigen::MatrixXd blk = bi.psi.transpose() * bj.gphi;
      const int shift = static_cast<int>(std::clamp<std::int64_t>(bi.epsi + bj.ephi, -4000, 4000));
      for (Eigen::Index a = 0; a < mi; ++a)
        for (Eigen::Index c = 0; c < mj; ++c) {
          double v = std::ldexp(blk(a, c), shift);
          if (bi.tau < bj.tau)
            v -= reflected_kernel_conjugated(bi.tau, bj.tau, bi.rule.nodes[static_cast<std::size_t>(a)],
                                             bj.rule.nodes[static_cast<std::size_t>(c)]);
          k(oi + a, oj + c) = v;
        }
      oj += mj;
    }
    oi += mi;
  }
  return nystrom_det(k, w);
}

}  // namespace

void TimeSlices::validate() const {
  require(!slices.empty(), "time slices: need at least one slice");
  for (std::size_t i = 0; i < slices.size(); ++i) {
    require(slices[i].tau > 0.0 && std::isfinite(slices[i].tau), "time slices: tau must be positive");
    require(slices[i].eta <= 0.0, "time slices: eta must be <= 0");
    if (i > 0) require(slices[i].tau > slices[i - 1].tau, "time slices: times must be strictly increasing");
  }
}

TimeSlices TimeSlices::from_constraints(const ScalingMap& map, const std::vector<PointConstraint>& pts) {
  TimeSlices ts;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    require(pts[i].t > 0.0 && pts[i].t < 1.0, "slices: t must lie in (0,1)");
    require(pts[i].h <= map.r, "slices: h must not exceed r");
    if (i > 0) require(pts[i].t > pts[i - 1].t, "slices: t must be strictly increasing (merge duplicates first)");
    const double tau = ScalingMap::tau(pts[i].t);
    ts.slices.push_back({tau, map.eta(tau, pts[i].h)});
  }
  ts.validate();
  return ts;
}

DetResult stay_below_constant(const K0Matrix& k0) {
  DetResult d;
  d.value = k0.det();
  d.err_est = k0.err_est();
  d.method = k0.route() == K0Matrix::Route::residue ? "residue" : "gauss-hermite";
  return d;
}

DetResult stay_below_constant(const ScalingMap& map) {
  require(map.r >= 0.0, "stay_below: r must be >= 0");
  if (map.r == 0.0) return {0.0, 0.0, "exact"};
  return stay_below_constant(K0Matrix(map));
}

DetResult gap_probability_multipoint(const FiniteKernel& kernel, const TimeSlices& slices, const FredholmOptions& opt) {
  slices.validate();
  DetResult d;
  d.method = "block-nystrom";
  d.value = multipoint_once(kernel, slices, opt);
  if (opt.estimate_error) d.err_est = std::fabs(d.value - multipoint_once(kernel, slices, refined(opt)));
  return d;
}

DetResult conditional_stay_below(const FiniteKernel& kernel, const ThresholdProfile& profile, const FredholmOptions& opt) {
  profile.validate();
  require(std::fabs(profile.r - kernel.map().r) <= 1e-12 * std::max(1.0, std::fabs(profile.r)),
          "conditional: profile level differs from the kernel's r");
  DetResult d;
  d.method = "path-integral";
  if (trivial(profile)) return {1.0, 0.0, "trivial"};
  d.value = conditional_once(kernel, profile, opt);
  if (opt.estimate_error) {
    FredholmOptions o = refined(opt);
    const auto [ta, tb] = support(profile);
    (void)ta;
    o.truncation = 1.25 * (opt.truncation > 0.0 ? opt.truncation : default_truncation(kernel.map(), tb));
    d.err_est = std::fabs(d.value - conditional_once(kernel, profile, o));
  }
  return d;
}

DetResult conditional_stay_below_reduced(const FiniteKernel& kernel, const ThresholdProfile& profile,
                                         const FredholmOptions& opt) {
  profile.validate();
  if (trivial(profile)) return {1.0, 0.0, "trivial"};
  DetResult d;
  d.method = "reduced";
  d.value = reduced_once(kernel, profile, opt);
  if (opt.estimate_error) d.err_est = std::fabs(d.value - reduced_once(kernel, profile, refined(opt)));
  return d;
}

double time_reversal_check(const FiniteKernel& kernel, const ThresholdProfile& profile, const FredholmOptions& opt) {
  require(profile.kind == ThresholdProfile::Kind::points, "time reversal check needs point constraints");
  FredholmOptions o = opt;
  o.estimate_error = false;
  const auto a = gap_probability_multipoint(kernel, TimeSlices::from_constraints(kernel.map(), profile.points), o);
  const auto b = gap_probability_multipoint(kernel, TimeSlices::from_constraints(kernel.map(), profile.reversed().points), o);
  return std::fabs(a.value - b.value);
}

}  // namespace tacnode
